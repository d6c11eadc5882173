//! Random instances and agreement between the exact and sampled paths.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

use super::classify::{classify, Classification};
use super::sampling::{check_structure, draw_regular, substream, SampleBox, SamplerConfig};
use super::ReducibilityStructure;
use crate::error::Result;
use crate::funcs::UnivariateFunction;
use crate::quasigroup::RationalQuasigroup;
use crate::scalar::rat;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorConfig {
    pub min_arity: usize,
    pub max_arity: usize,
    pub max_degree: usize,
    /// Share of instances with planted equal-slope blocks.
    pub planted_fraction: f64,
    /// Among planted instances, share where every index gets the same slope.
    pub all_equal_fraction: f64,
    /// Share of instances with random nonzero `A`, `a`.
    pub shifted_fraction: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_arity: 3,
            max_arity: 6,
            max_degree: 4,
            planted_fraction: 0.5,
            all_equal_fraction: 0.15,
            shifted_fraction: 0.5,
        }
    }
}

/// What the generator planted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Planted {
    /// Exactly these equal-slope blocks (possibly none).
    Blocks(Vec<Vec<usize>>),
    /// All slopes equal and constants chosen so `F` is constant.
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub quasigroup: RationalQuasigroup,
    pub planted: Planted,
    pub was_planted: bool,
}

fn small_rational<R: Rng + ?Sized>(rng: &mut R, max_num: i64) -> BigRational {
    rat(
        rng.random_range(-max_num..=max_num),
        rng.random_range(1..=3),
    )
}

fn nonzero_rational<R: Rng + ?Sized>(rng: &mut R, max_num: i64) -> BigRational {
    loop {
        let r = small_rational(rng, max_num);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Slope not yet used by any affine function of the instance.
fn fresh_slope<R: Rng + ?Sized>(rng: &mut R, used: &mut BTreeSet<BigRational>) -> BigRational {
    loop {
        let c = small_rational(rng, 6);
        if used.insert(c.clone()) {
            return c;
        }
    }
}

fn nonlinear<R: Rng + ?Sized>(rng: &mut R, max_degree: usize) -> UnivariateFunction {
    let degree = rng.random_range(2..=max_degree.max(2));
    let mut coeffs: Vec<BigRational> = (0..degree).map(|_| small_rational(rng, 4)).collect();
    coeffs.push(nonzero_rational(rng, 4));
    UnivariateFunction::with_max_degree(coeffs, degree).unwrap_or_else(|_| unreachable!())
}

/// Generates one instance. Functions outside planted blocks are nonlinear or
/// affine with a unique slope, so planted blocks are exactly the blocks.
pub fn generate_instance<R: Rng + ?Sized>(rng: &mut R, cfg: &GeneratorConfig) -> GeneratedInstance {
    let n = rng.random_range(cfg.min_arity..=cfg.max_arity);
    let was_planted = rng.random_bool(cfg.planted_fraction);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let all_equal = was_planted && rng.random_bool(cfg.all_equal_fraction);
    if all_equal {
        blocks.push(order.clone());
    } else if was_planted {
        let mut rest = &order[..];
        let wanted = if n >= 4 && rng.random_bool(0.3) { 2 } else { 1 };
        for _ in 0..wanted {
            let max_size = rest.len().min(n - 1);
            if max_size < 2 {
                break;
            }
            let size = rng.random_range(2..=max_size.min(4));
            blocks.push(rest[..size].to_vec());
            rest = &rest[size..];
        }
    }

    let mut used = BTreeSet::new();
    let mut funcs = vec![UnivariateFunction::zero(); n];
    for block in &blocks {
        let slope = fresh_slope(rng, &mut used);
        for &i in block {
            funcs[i - 1] = UnivariateFunction::affine(slope.clone(), small_rational(rng, 4));
        }
    }
    for i in 1..=n {
        if blocks.iter().any(|b| b.contains(&i)) {
            continue;
        }
        funcs[i - 1] = if rng.random_bool(0.3) {
            let slope = fresh_slope(rng, &mut used);
            UnivariateFunction::affine(slope, small_rational(rng, 4))
        } else {
            nonlinear(rng, cfg.max_degree)
        };
    }

    let (mut numer_shift, denom_shift) = if rng.random_bool(cfg.shifted_fraction) {
        (small_rational(rng, 5), small_rational(rng, 5))
    } else {
        (BigRational::zero(), BigRational::zero())
    };
    let mut planted = Planted::Blocks(blocks.clone());
    if all_equal && rng.random_bool(0.5) {
        // A = c a - D makes the numerator c (S + a): F is constant
        let (slope, _) = funcs[0].linear_slope().unwrap_or_default();
        let d: BigRational = funcs.iter().map(|f| f.coeff(0)).sum();
        numer_shift = slope * &denom_shift - d;
        planted = Planted::Degenerate;
    } else if all_equal {
        let (slope, _) = funcs[0].linear_slope().unwrap_or_default();
        let d: BigRational = funcs.iter().map(|f| f.coeff(0)).sum();
        if numer_shift == slope * &denom_shift - d {
            numer_shift += BigRational::from_integer(1.into());
        }
    }
    if let Planted::Blocks(ref mut bs) = planted {
        for b in bs.iter_mut() {
            b.sort_unstable();
        }
        bs.sort();
    }
    let quasigroup = RationalQuasigroup::new_unchecked(funcs, numer_shift, denom_shift)
        .unwrap_or_else(|_| unreachable!("arity is at least 2"));
    GeneratedInstance {
        quasigroup,
        planted,
        was_planted,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossValidationConfig {
    pub trials: usize,
    pub generator: GeneratorConfig,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CrossValidationConfig {
    fn default() -> Self {
        CrossValidationConfig {
            trials: 200,
            generator: GeneratorConfig::default(),
            samples: 64,
            tol: 1e-8,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disagreement {
    pub trial: usize,
    pub spec: Value,
    pub exact: Value,
    /// Pairs the sampler judged reducible.
    pub sampled_pairs: Vec<(usize, usize)>,
    pub planted: Planted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    pub trials: usize,
    pub agreements: usize,
    pub agreement_pct: f64,
    pub planted_trials: usize,
    pub planted_recovered: usize,
    pub verdicts: BTreeMap<String, usize>,
    pub disagreements: Vec<Disagreement>,
}

impl AgreementReport {
    pub fn all_agree(&self) -> bool {
        self.agreements == self.trials && self.planted_recovered == self.planted_trials
    }
}

/// Sampled witness of non-solvability: every normalized first partial is
/// below `tol` at every sample.
fn sampled_degenerate(q: &RationalQuasigroup, cfg: &SamplerConfig) -> Result<bool> {
    let mut rng = substream(cfg.seed, u64::MAX);
    let mut attempts = 0;
    for _ in 0..cfg.samples {
        let degenerate = draw_regular(cfg, &mut rng, &mut attempts, |p| {
            let s = q.denominator(p)?;
            let g = q.numerator(p);
            Ok((1..=q.arity()).all(|i| {
                let di = q.func(i).eval_jet(&p[i - 1]).1;
                let fi = q.first_partial(i, p).unwrap_or(f64::NAN);
                let scale = di.abs() / s.abs() + g.abs() / (s * s);
                fi.abs() <= cfg.tol * scale + 1e-300
            }))
        })?;
        if !degenerate {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pairs `(a, b)` whose flat two-element block passes the sampled check.
pub fn sampled_pairs(
    q: &RationalQuasigroup,
    cfg: &SamplerConfig,
) -> Result<BTreeSet<(usize, usize)>> {
    let n = q.arity();
    let mut out = BTreeSet::new();
    for a in 1..=n {
        for b in a + 1..=n {
            let s = ReducibilityStructure::from_blocks(n, &[vec![a, b]])?;
            if check_structure(q, &s, cfg)?.holds {
                out.insert((a, b));
            }
        }
    }
    Ok(out)
}

/// Runs `classify` and per-pair `check_structure` on random instances.
pub fn cross_validate(cfg: &CrossValidationConfig) -> Result<AgreementReport> {
    let mut report = AgreementReport {
        trials: cfg.trials,
        agreements: 0,
        agreement_pct: 100.0,
        planted_trials: 0,
        planted_recovered: 0,
        verdicts: BTreeMap::new(),
        disagreements: Vec::new(),
    };
    for trial in 0..cfg.trials {
        let mut rng = substream(cfg.seed, trial as u64);
        let inst = generate_instance(&mut rng, &cfg.generator);
        let q = &inst.quasigroup;
        let sampler = SamplerConfig::new(
            cfg.samples,
            SampleBox::default_for(q),
            cfg.seed.wrapping_add(trial as u64),
            cfg.tol,
        )?;
        let class = classify(q);
        *report
            .verdicts
            .entry(class.verdict().to_string())
            .or_default() += 1;

        let (agree, pairs) = match &class {
            Classification::NotAQuasigroup { .. } => {
                (sampled_degenerate(q, &sampler)?, BTreeSet::new())
            }
            _ => {
                let pairs = sampled_pairs(q, &sampler)?;
                (pairs == class.same_block_pairs(), pairs)
            }
        };
        let recovered = match &inst.planted {
            Planted::Degenerate => matches!(class, Classification::NotAQuasigroup { .. }),
            Planted::Blocks(blocks) => &class.block_index_sets() == blocks,
        };
        if inst.was_planted {
            report.planted_trials += 1;
            report.planted_recovered += usize::from(recovered);
        }
        if agree && recovered {
            report.agreements += 1;
        } else {
            report.disagreements.push(Disagreement {
                trial,
                spec: q.to_json_value(),
                exact: class.to_json(),
                sampled_pairs: pairs.into_iter().collect(),
                planted: inst.planted.clone(),
            });
        }
    }
    if cfg.trials > 0 {
        report.agreement_pct = 100.0 * report.agreements as f64 / cfg.trials as f64;
    }
    Ok(report)
}
