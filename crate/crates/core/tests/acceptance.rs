//! End-to-end acceptance criteria. Prints one line per criterion and exits
//! nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{centered_rank, exact_point, fd_first, fd_mixed, instance, rel, to_f64};
use num_rational::BigRational;
use quasiweb::gallery;
use quasiweb::quasigroup::DifferentiableMap;
use quasiweb::reducibility::{
    classify, cross_validate, factored_residual, identical_derivative_pairs, residual,
    residual_exact, substream, Classification, ConditionTriple, CrossValidationConfig,
    ReducibilityStructure, SampleBox,
};
use quasiweb::scalar::{int, rational_to_f64};
use quasiweb::web::{
    export_web, identical_normal_pairs, identical_normal_pairs_sampled, level_set_sample,
    normal_vector, ExportFormat,
};
use quasiweb::{RationalQuasigroup, UnivariateFunction};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_triple<R: Rng>(n: usize, rng: &mut R) -> ConditionTriple {
    loop {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        let p = rng.random_range(1..=n);
        if let Ok(t) = ConditionTriple::new(a, b, p) {
            return t;
        }
    }
}

fn ac1_cross_validation() -> Outcome {
    let start = Instant::now();
    let report = cross_validate(&CrossValidationConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(report.trials == 200, || format!("{} trials", report.trials))?;
    ensure(report.all_agree(), || {
        format!(
            "{} disagreements, first: {:?}",
            report.disagreements.len(),
            report.disagreements.first()
        )
    })?;
    ensure(report.planted_recovered == report.planted_trials, || {
        format!(
            "{}/{} planted recovered",
            report.planted_recovered, report.planted_trials
        )
    })?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!(
        "{}/{} agree, {}/{} planted recovered, {elapsed:.2}s",
        report.agreements, report.trials, report.planted_recovered, report.planted_trials
    ))
}

fn ac2_known_verdicts() -> Outcome {
    for n in [3, 4, 5] {
        let c = classify(&gallery::weighted(n));
        ensure(c == Classification::Irreducible, || {
            format!("weighted n={n}: {c}")
        })?;
    }
    for n in [2, 3, 5] {
        let c = classify(&gallery::spheres(n));
        ensure(c == Classification::Irreducible, || {
            format!("spheres n={n}: {c}")
        })?;
    }
    let same = RationalQuasigroup::new_unchecked(
        vec![UnivariateFunction::from_ints(&[0, 1]); 3],
        int(0),
        int(0),
    )
    .map_err(|e| e.to_string())?;
    let c = classify(&same);
    ensure(matches!(c, Classification::NotAQuasigroup { .. }), || {
        format!("equal linear: {c}")
    })?;
    Ok("weighted n=3,4,5 and spheres n=2,3,5 irreducible; equal linear rejected".into())
}

fn ac3_factorization() -> Outcome {
    let mut rng = substream(3, 0);
    let mut worst = 0.0f64;
    for case in 0..10_000u64 {
        let q = instance(case).quasigroup;
        let p = exact_point(&q, &mut rng);
        let t = random_triple(q.arity(), &mut rng);
        let s = q.denominator(&p).map_err(|e| e.to_string())?;
        let s4 = &s * &s * &s * &s;
        let lhs = residual_exact(&q, t, &p).map_err(|e| e.to_string())? * &s4;
        let rhs = factored_residual(&q, t, &p).map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || format!("case {case}: exact {lhs} != {rhs}"))?;

        let pf = to_f64(&p);
        let r = residual(&q, t, &pf).map_err(|e| e.to_string())?;
        let s4f = rational_to_f64(&s4);
        let rhsf = factored_residual(&q, t, &pf).map_err(|e| e.to_string())?;
        let err = rel(r.raw * s4f, rhsf, r.scale * s4f);
        worst = worst.max(err);
        ensure(err <= 1e-10, || {
            format!("case {case}: float relative error {err:e}")
        })?;
    }

    let q = RationalQuasigroup::homogeneous(vec![
        UnivariateFunction::from_ints(&[0, 0, 1]),
        UnivariateFunction::from_ints(&[0, 0, 0, 1]),
        UnivariateFunction::from_ints(&[0, 1]),
    ])
    .map_err(|e| e.to_string())?;
    let t = ConditionTriple::new(1, 2, 3).map_err(|e| e.to_string())?;
    let f = factored_residual(&q, t, &[1.0, 2.0, 1.0]).map_err(|e| e.to_string())?;
    ensure((f - 60.0).abs() <= 1e-12, || format!("factored value {f}"))?;
    let r = residual(&q, t, &[1.0, 2.0, 1.0]).map_err(|e| e.to_string())?;
    ensure((r.raw - 0.234375).abs() <= 1e-12, || {
        format!("residual {}", r.raw)
    })?;
    Ok(format!(
        "10000 cases exact, float max rel {worst:.1e}; spot 60 and 0.234375"
    ))
}

fn ac4_derivatives() -> Outcome {
    let mut rng = substream(4, 0);
    let mut worst_jet = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut done = 0;
    let mut seed = 0u64;
    while done < 1000 {
        seed += 1;
        let q = instance(seed).quasigroup;
        let n = q.arity();
        let p = exact_point(&q, &mut rng);
        let s = rational_to_f64(&q.denominator(&p).map_err(|e| e.to_string())?);
        if s.abs() < 0.5 {
            continue;
        }
        let i = rng.random_range(1..=n);
        let j = rng.random_range(1..=n);
        let exact: Vec<f64> = q
            .partials(&p, i, j)
            .map_err(|e| e.to_string())?
            .iter()
            .map(rational_to_f64)
            .collect();
        let pf = to_f64(&p);
        let closed = q.jet(&pf, (i, j)).map_err(|e| e.to_string())?;
        let tree = q
            .to_generic_map()
            .jet_eval(&pf, (i, j))
            .map_err(|e| e.to_string())?;
        for jet in [&closed, &tree] {
            for (got, want) in [jet.value, jet.d_i, jet.d_j, jet.d_ij]
                .into_iter()
                .zip(&exact)
            {
                let e = rel(got, *want, 1.0);
                worst_jet = worst_jet.max(e);
                ensure(e <= 1e-10, || {
                    format!("case {done}: jet {got} vs exact {want}")
                })?;
            }
        }
        let value = |x: &[f64]| q.eval(x).unwrap_or(f64::NAN);
        for (got, want) in [
            (fd_first(&value, &pf, i), exact[1]),
            (fd_mixed(&value, &pf, i, j), exact[3]),
        ] {
            let e = rel(got, want, 1.0);
            worst_fd = worst_fd.max(e);
            ensure(e <= 1e-5, || {
                format!("case {done}: fd {got} vs exact {want} at {pf:?}")
            })?;
        }
        done += 1;
    }
    Ok(format!(
        "1000 cases, jet max rel {worst_jet:.1e}, fd max rel {worst_fd:.1e}"
    ))
}

fn ac5_isotopy() -> Outcome {
    let mut rng = substream(5, 0);
    let mut checked = 0;
    let mut seed = 50_000u64;
    let mut worst = 0.0f64;
    while checked < 100 {
        seed += 1;
        let q = instance(seed).quasigroup;
        if q.denom_shift() == &BigRational::from_integer(0.into())
            && q.numer_shift() == &BigRational::from_integer(0.into())
        {
            continue;
        }
        let normal = q.isotopy_normalize();
        let (c0, c1) = (classify(&q), classify(&normal));
        ensure(
            c0.verdict() == c1.verdict() && c0.block_index_sets() == c1.block_index_sets(),
            || format!("seed {seed}: {c0} vs {c1}"),
        )?;
        for _ in 0..10 {
            let p = SampleBox::default_for(&q).sample(&mut rng);
            let (Ok(v0), Ok(v1)) = (q.eval(&p), normal.eval(&q.isotopy_shift_point(&p))) else {
                continue;
            };
            let e = rel(v0, v1, 1.0);
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("seed {seed}: {v0} vs {v1}"))?;
        }
        checked += 1;
    }
    Ok(format!("100 shifted instances, eval max rel {worst:.1e}"))
}

fn ac6_normals() -> Outcome {
    let mut agree = 0;
    for trial in 0..200u64 {
        let mut rng = substream(42, trial);
        let q = quasiweb::reducibility::generate_instance(&mut rng, &Default::default()).quasigroup;
        let exact = identical_normal_pairs(&q);
        let mut probe = substream(42, 10_000 + trial);
        let sampled =
            identical_normal_pairs_sampled(&q, &SampleBox::default_for(&q), 64, 1e-8, &mut probe)
                .map_err(|e| e.to_string())?;
        ensure(sampled == exact, || {
            format!("trial {trial}: sampled {sampled:?} vs exact {exact:?}")
        })?;
        let c = classify(&q);
        if !matches!(c, Classification::NotAQuasigroup { .. }) {
            ensure(exact == c.same_block_pairs(), || {
                format!("trial {trial}: {exact:?} vs blocks of {c}")
            })?;
        }
        ensure(exact == identical_derivative_pairs(&q), || {
            format!("trial {trial}: derivative pairs differ")
        })?;
        agree += 1;
    }
    let q = gallery::spheres(3);
    let nv = normal_vector(&q, &[2.0, 0.0, 0.0]).map_err(|e| e.to_string())?;
    ensure(nv == vec![1.0, -3.0, -3.0], || format!("normal {nv:?}"))?;
    ensure(identical_normal_pairs(&q).is_empty(), || {
        "spheres report a pair".into()
    })?;
    Ok(format!(
        "{agree}/200 instances consistent; spheres normal (1,-3,-3)"
    ))
}

fn ac7_web_export() -> Outcome {
    let q = gallery::circles();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("circles.csv");
    let levels = [0.5, 1.0, 2.0];
    let domain = SampleBox::cube(2, -3.0, 3.0).map_err(|e| e.to_string())?;
    let summary = export_web(&q, &levels, 50, &domain, 7, ExportFormat::Csv, &path)
        .map_err(|e| e.to_string())?;
    ensure(summary.failed_levels.is_empty(), || {
        format!("failed levels {:?}", summary.failed_levels)
    })?;

    let mut reader = csv::Reader::from_path(&path).map_err(|e| e.to_string())?;
    let mut regular = 0;
    let mut bases: Vec<(f64, Vec<f64>)> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let vals: Vec<f64> = row
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let (x, alpha) = (vals[..2].to_vec(), vals[2]);
        let s = x[0] + x[1] - 1.0;
        let g = x[0] * x[0] + x[1] * x[1] - 1.0;
        if s.abs() > 1e-6 {
            let e = (g / s - alpha).abs();
            ensure(e <= 1e-9, || {
                format!("point {x:?} off level {alpha}: {e:e}")
            })?;
            regular += 1;
        } else {
            ensure((g - alpha * s).abs() <= 1e-9, || {
                format!("base {x:?} off level {alpha}")
            })?;
            bases.push((alpha, x));
        }
    }
    for alpha in levels {
        for want in [[1.0, 0.0], [0.0, 1.0]] {
            let found = bases.iter().any(|(a, x)| {
                *a == alpha && (x[0] - want[0]).abs() <= 1e-9 && (x[1] - want[1]).abs() <= 1e-9
            });
            ensure(found, || format!("level {alpha} lacks base point {want:?}"))?;
        }
    }

    let w = gallery::weighted(3);
    let mut rng = substream(7, 0);
    let slice = level_set_sample(
        &w,
        2.0,
        50,
        &SampleBox::cube(3, -3.0, 3.0).map_err(|e| e.to_string())?,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let rank = centered_rank(&slice.points, 1e-9);
    ensure(slice.points.len() >= 3 && rank == 2, || {
        format!("weighted slice rank {rank}")
    })?;
    Ok(format!(
        "{regular} level points and {} base points valid; weighted slice rank 2",
        bases.len()
    ))
}

fn ac8_conditions() -> Outcome {
    let set = |v: &[(usize, usize, usize)]| -> BTreeSet<ConditionTriple> {
        v.iter()
            .map(|&(a, b, p)| ConditionTriple::new(a, b, p).unwrap())
            .collect()
    };
    let flat = ReducibilityStructure::parse(4, "[[1,2],3,4]").map_err(|e| e.to_string())?;
    ensure(flat.conditions() == set(&[(1, 2, 3), (1, 2, 4)]), || {
        format!("{flat}: {:?}", flat.conditions())
    })?;

    let two = ReducibilityStructure::from_blocks(6, &[vec![1, 2], vec![3, 4, 5]])
        .map_err(|e| e.to_string())?;
    let mut want: Vec<_> = [3, 4, 5, 6].iter().map(|&p| (1, 2, p)).collect();
    for (a, b) in [(3, 4), (3, 5), (4, 5)] {
        want.extend([1, 2, 6].iter().map(|&s| (a, b, s)));
    }
    ensure(two.conditions() == set(&want), || {
        format!("{two}: {:?}", two.conditions())
    })?;

    let nested = ReducibilityStructure::parse(5, "[[[1,2],3],4,5]").map_err(|e| e.to_string())?;
    let mut want = vec![(1, 2, 3)];
    for (a, b) in [(1, 2), (1, 3), (2, 3)] {
        want.extend([4, 5].iter().map(|&p| (a, b, p)));
    }
    ensure(nested.conditions() == set(&want), || {
        format!("{nested}: {:?}", nested.conditions())
    })?;

    for n in 3..8 {
        for k in 2..n {
            let s = ReducibilityStructure::from_blocks(n, &[(1..=k).collect()])
                .map_err(|e| e.to_string())?;
            let count = s.conditions().len();
            ensure(count == k * (k - 1) / 2 * (n - k), || {
                format!("n={n} k={k}: {count}")
            })?;
        }
    }
    Ok("flat, disjoint and nested triple sets exact".into())
}

fn ac9_determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_quasiweb"))
            .args(["verify", "--seed", "42"])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success(), || {
        format!(
            "exit {:?}: {}",
            a.status.code(),
            String::from_utf8_lossy(&a.stderr)
        )
    })?;
    ensure(a.stdout == b.stdout && a.stderr == b.stderr, || {
        "outputs differ".into()
    })?;
    ensure(b.status.code() == a.status.code(), || {
        "exit codes differ".into()
    })?;
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1 cross-validation", ac1_cross_validation),
        ("AC2 known verdicts", ac2_known_verdicts),
        ("AC3 residual factorization", ac3_factorization),
        ("AC4 derivative agreement", ac4_derivatives),
        ("AC5 isotopy invariance", ac5_isotopy),
        ("AC6 normal-vector pairs", ac6_normals),
        ("AC7 web export", ac7_web_export),
        ("AC8 condition triples", ac8_conditions),
        ("AC9 determinism", ac9_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
