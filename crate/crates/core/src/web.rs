//! The (n+1)-web of a rational instance: level hypersurfaces `F = alpha`,
//! their normals, and export of sampled slices.
//!
//! The web consists of the coordinate hyperplane families `x_i = const` and
//! the level family `f_1(x_1) + ... + f_n(x_n) + A - alpha (x_1 + ... + x_n + a) = 0`.

use std::collections::BTreeSet;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::funcs::UnivariateFunction;
use crate::quasigroup::RationalQuasigroup;
use crate::reducibility::{identical_derivative_pairs, SampleBox};
use crate::scalar::{format_rational, int};

/// Points kept on a slice satisfy `|F(p) - alpha|` at most this.
pub const LEVEL_TOL: f64 = 1e-9;
/// Cells of the sign-change grid used for degree three and higher.
pub const ROOT_GRID_CELLS: usize = 64;
const BISECTION_TOL: f64 = 1e-12;

/// Sampled points of one level hypersurface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WebSlice {
    pub alpha: f64,
    pub points: Vec<Vec<f64>>,
    pub normals: Vec<Vec<f64>>,
    /// Points of the base locus `S = 0, G = 0`, common to every level. `F`
    /// is undefined there; they satisfy the cross-multiplied level equation.
    pub base_points: Vec<Vec<f64>>,
    pub base_normals: Vec<Vec<f64>>,
}

/// `N_i = f_i'(x_i) - alpha` with `alpha = F(p)`.
pub fn normal_vector(q: &RationalQuasigroup, p: &[f64]) -> Result<Vec<f64>> {
    let alpha = q.eval(p)?;
    Ok(normal_at_level(q, p, alpha))
}

/// Normal of the level `alpha` hypersurface through `p`, without
/// evaluating `F` (valid on the base locus as well).
pub fn normal_at_level(q: &RationalQuasigroup, p: &[f64], alpha: f64) -> Vec<f64> {
    q.funcs()
        .iter()
        .zip(p)
        .map(|(f, x)| f.eval_jet(x).1 - alpha)
        .collect()
}

/// Pairs whose normal coordinates agree identically, decided exactly.
pub fn identical_normal_pairs(q: &RationalQuasigroup) -> BTreeSet<(usize, usize)> {
    identical_derivative_pairs(q)
}

/// Pairs whose normal coordinates agree at every sampled regular point.
pub fn identical_normal_pairs_sampled<R: Rng + ?Sized>(
    q: &RationalQuasigroup,
    domain: &SampleBox,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<BTreeSet<(usize, usize)>> {
    let n = q.arity();
    let mut candidates: BTreeSet<(usize, usize)> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect();
    let mut kept = 0;
    let mut attempts = 0;
    while kept < samples {
        let p = domain.sample(rng);
        let normal = match normal_vector(q, &p) {
            Ok(v) => v,
            Err(Error::SingularPoint { .. }) => {
                attempts += 1;
                if attempts > 100 * samples + 1000 {
                    return Err(Error::InvalidArgument(
                        "sampling box lies on the singular hyperplane".into(),
                    ));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        candidates.retain(|&(i, j)| {
            let (a, b) = (normal[i - 1], normal[j - 1]);
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
        });
        kept += 1;
    }
    Ok(candidates)
}

/// Constants `(A, a)` for which the level family of the squares instance
/// passes through every unit point `e_k`, whatever the level.
pub fn sphere_constants(n: usize) -> Result<(BigRational, BigRational)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "arity must be at least 2, got {n}"
        )));
    }
    pencil_constants(&vec![UnivariateFunction::monomial(2); n])
}

/// Solves `f_k(1) + sum_{i != k} f_i(0) + A = alpha (1 + a)` for all levels
/// `alpha` and all `k`: requires `a = -1` and a common value of the left side.
pub fn pencil_constants(funcs: &[UnivariateFunction]) -> Result<(BigRational, BigRational)> {
    let at0: Vec<BigRational> = funcs.iter().map(|f| f.eval(&BigRational::zero())).collect();
    let total0: BigRational = at0.iter().sum();
    let mut numer_shift = None;
    for (f, f0) in funcs.iter().zip(&at0) {
        let candidate = -(f.eval(&BigRational::one()) - f0 + &total0);
        match &numer_shift {
            None => numer_shift = Some(candidate),
            Some(c) if *c == candidate => {}
            Some(_) => {
                return Err(Error::InvalidArgument(
                    "no constants make every unit point a base point".into(),
                ))
            }
        }
    }
    Ok((numer_shift.unwrap_or_default(), int(-1)))
}

/// Real roots of a floating polynomial (ascending coefficients) in
/// `range`, or anywhere for degree at most two.
pub fn real_roots(coeffs: &[f64], range: (f64, f64)) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    match c.len() {
        0 | 1 => Vec::new(),
        2 => vec![-c[0] / c[1]],
        3 => {
            let (c0, c1, c2) = (c[0], c[1], c[2]);
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc < 0.0 {
                return Vec::new();
            }
            let qv = -0.5 * (c1 + c1.signum() * disc.sqrt());
            if qv == 0.0 {
                return vec![0.0];
            }
            let mut r = vec![qv / c2, c0 / qv];
            r.sort_by(f64::total_cmp);
            r.dedup();
            r
        }
        _ => bracketed_roots(&c, range),
    }
}

fn horner(c: &[f64], x: f64) -> (f64, f64) {
    c.iter()
        .rev()
        .fold((0.0, 0.0), |(p, dp), &a| (p * x + a, dp * x + p))
}

fn bracketed_roots(c: &[f64], (lo, hi): (f64, f64)) -> Vec<f64> {
    let step = (hi - lo) / ROOT_GRID_CELLS as f64;
    let nodes: Vec<f64> = (0..=ROOT_GRID_CELLS)
        .map(|k| lo + step * k as f64)
        .collect();
    let vals: Vec<f64> = nodes.iter().map(|&x| horner(c, x).0).collect();
    let mut roots = Vec::new();
    for k in 0..ROOT_GRID_CELLS {
        let (mut a, mut b) = (nodes[k], nodes[k + 1]);
        let (mut fa, fb) = (vals[k], vals[k + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if k + 1 == ROOT_GRID_CELLS && fb == 0.0 {
            roots.push(b);
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        while b - a > BISECTION_TOL * a.abs().max(b.abs()).max(1.0) {
            let m = 0.5 * (a + b);
            let fm = horner(c, m).0;
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..2 {
            let (p, dp) = horner(c, x);
            if dp != 0.0 {
                let next = x - p / dp;
                if horner(c, next).0.abs() <= p.abs() {
                    x = next;
                }
            }
        }
        roots.push(x);
    }
    roots
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    for _ in 0..2 {
        let (p, dp) = horner(c, x);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let next = x - p / dp;
        if horner(c, next).0.abs() < p.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Solves `F(x_1, ..., x_{n-1}, t) = alpha` for `t` and returns the points
/// that are regular and lie on the level within [`LEVEL_TOL`].
pub fn solve_last_coordinate(
    q: &RationalQuasigroup,
    alpha: f64,
    prefix: &[f64],
    search: (f64, f64),
) -> Vec<Vec<f64>> {
    let n = q.arity();
    assert_eq!(prefix.len(), n - 1, "prefix must fix x_1..x_(n-1)");
    let a = crate::scalar::rational_to_f64(q.denom_shift());
    let big_a = crate::scalar::rational_to_f64(q.numer_shift());
    let known: f64 = q.funcs()[..n - 1]
        .iter()
        .zip(prefix)
        .map(|(f, x)| f.eval(x))
        .sum();
    let rhs = alpha * (prefix.iter().sum::<f64>() + a) - known - big_a;
    let mut c = q.func(n).to_f64_coeffs().to_vec();
    c.resize(c.len().max(2), 0.0);
    c[1] -= alpha;
    c[0] -= rhs;

    let roots = if c.iter().all(|&v| v == 0.0) {
        // every t solves; take the middle of the search range
        vec![0.5 * (search.0 + search.1)]
    } else {
        real_roots(&c, search)
            .into_iter()
            .map(|t| polish(&c, t))
            .collect()
    };
    roots
        .into_iter()
        .filter(|t| t.is_finite())
        .map(|t| {
            let mut p = prefix.to_vec();
            p.push(t);
            p
        })
        .filter(|p| matches!(q.eval(p), Ok(v) if (v - alpha).abs() <= LEVEL_TOL))
        .collect()
}

/// Finite base locus for arity two: real solutions of `S = 0, G = 0`.
/// Higher arities have a positive-dimensional base locus and return nothing.
pub fn base_points(q: &RationalQuasigroup, search: (f64, f64)) -> Vec<Vec<f64>> {
    if q.arity() != 2 {
        return Vec::new();
    }
    let a = q.denom_shift();
    // x2 = -a - x1
    let g = &(q.func(1) + &q.func(2).compose_affine(&-BigRational::one(), &-a.clone()))
        + &UnivariateFunction::constant(q.numer_shift().clone());
    if g.is_zero() {
        return Vec::new();
    }
    let c = g.to_f64_coeffs();
    let af = crate::scalar::rational_to_f64(a);
    real_roots(c, search)
        .into_iter()
        .map(|x| polish(c, x))
        .filter(|x| x.is_finite())
        .map(|x| vec![x, -af - x])
        .collect()
}

/// Samples `count` points on the level `alpha` by drawing `x_1..x_{n-1}`
/// from `domain` and solving for `x_n`.
pub fn level_set_sample<R: Rng + ?Sized>(
    q: &RationalQuasigroup,
    alpha: f64,
    count: usize,
    domain: &SampleBox,
    rng: &mut R,
) -> Result<WebSlice> {
    let n = q.arity();
    if domain.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "sampling box has {} coordinates, quasigroup has arity {n}",
            domain.dim()
        )));
    }
    let search = domain.bounds()[n - 1];
    let cap = 200 * count + 1000;
    let mut points = Vec::new();
    let mut attempts = 0;
    while points.len() < count && attempts < cap {
        attempts += 1;
        let prefix: Vec<f64> = domain.bounds()[..n - 1]
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        for p in solve_last_coordinate(q, alpha, &prefix, search) {
            if points.len() < count {
                points.push(p);
            }
        }
    }
    if points.is_empty() && count > 0 {
        return Err(Error::NoRootsFound { alpha, attempts });
    }
    let normals = points
        .iter()
        .map(|p| normal_at_level(q, p, alpha))
        .collect();
    let base = base_points(q, domain.bounds()[0]);
    let base_normals = base.iter().map(|p| normal_at_level(q, p, alpha)).collect();
    Ok(WebSlice {
        alpha,
        points,
        normals,
        base_points: base,
        base_normals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExportSummary {
    /// `(alpha, regular points, base points)` per exported slice.
    pub slices: Vec<(f64, usize, usize)>,
    /// Levels where no root was found.
    pub failed_levels: Vec<f64>,
}

/// Samples one slice per level. Slice `k` uses the substream `k` of `seed`.
pub fn sample_levels(
    q: &RationalQuasigroup,
    levels: &[f64],
    count: usize,
    domain: &SampleBox,
    seed: u64,
) -> (Vec<WebSlice>, Vec<f64>) {
    let mut slices = Vec::new();
    let mut failed = Vec::new();
    for (k, &alpha) in levels.iter().enumerate() {
        let mut rng = crate::reducibility::substream(seed, k as u64);
        match level_set_sample(q, alpha, count, domain, &mut rng) {
            Ok(s) => slices.push(s),
            Err(_) => failed.push(alpha),
        }
    }
    (slices, failed)
}

/// Header `x1,...,xn,alpha,N1,...,Nn`; regular points first, then base points.
pub fn slices_to_csv(n: usize, slices: &[WebSlice]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("alpha".into());
    header.extend((1..=n).map(|i| format!("N{i}")));
    w.write_record(&header).map_err(io)?;
    for s in slices {
        let rows = s
            .points
            .iter()
            .zip(&s.normals)
            .chain(s.base_points.iter().zip(&s.base_normals));
        for (p, nv) in rows {
            let mut rec: Vec<String> = p.iter().map(f64::to_string).collect();
            rec.push(s.alpha.to_string());
            rec.extend(nv.iter().map(f64::to_string));
            w.write_record(&rec).map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn slices_to_json(q: &RationalQuasigroup, slices: &[WebSlice]) -> String {
    let n = q.arity();
    let families: Vec<_> = (1..=n)
        .map(|i| json!({"index": i, "family": format!("x{i} = const"), "normal_axis": i}))
        .collect();
    let value = json!({
        "n": n,
        "spec": q.to_json_value(),
        "level_family": format!(
            "f1(x1) + ... + f{n}(x{n}) + {} - alpha (x1 + ... + x{n} + {}) = 0",
            format_rational(q.numer_shift()),
            format_rational(q.denom_shift())
        ),
        "hyperplane_families": families,
        "slices": slices,
    });
    serde_json::to_string_pretty(&value).unwrap_or_default()
}

/// Writes sampled slices for `levels` to `dest`.
pub fn export_web(
    q: &RationalQuasigroup,
    levels: &[f64],
    count: usize,
    domain: &SampleBox,
    seed: u64,
    format: ExportFormat,
    dest: &Path,
) -> Result<ExportSummary> {
    let (slices, failed_levels) = sample_levels(q, levels, count, domain, seed);
    let body = match format {
        ExportFormat::Csv => slices_to_csv(q.arity(), &slices)?,
        ExportFormat::Json => slices_to_json(q, &slices),
    };
    std::fs::write(dest, body)?;
    Ok(ExportSummary {
        slices: slices
            .iter()
            .map(|s| (s.alpha, s.points.len(), s.base_points.len()))
            .collect(),
        failed_levels,
    })
}
