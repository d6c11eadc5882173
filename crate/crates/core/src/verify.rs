//! Derivative agreement suite: closed-form partials, jet propagation
//! through the expression-tree encoding, and central finite differences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quasigroup::{DifferentiableMap, RationalQuasigroup};
use crate::reducibility::{
    cross_validate, generate_instance, substream, AgreementReport, CrossValidationConfig,
    GeneratorConfig, SampleBox,
};

/// Relative error against the magnitude of the terms that produced the value.
pub fn relative_error(x: f64, y: f64, scale: f64) -> f64 {
    let d = (x - y).abs();
    if d == 0.0 {
        return 0.0;
    }
    d / x.abs().max(y.abs()).max(scale)
}

/// Step for coordinate `x`: `1e-4 * max(1, |x|)`.
pub fn fd_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1.0)
}

/// Central difference of the first partial along `i`.
pub fn fd_first<M: DifferentiableMap + ?Sized>(m: &M, p: &[f64], i: usize) -> Result<f64> {
    let h = fd_step(p[i - 1]);
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[i - 1] += h;
    minus[i - 1] -= h;
    Ok((m.value(&plus)? - m.value(&minus)?) / (2.0 * h))
}

/// Central difference of the second partial along `i`, `j`.
pub fn fd_second<M: DifferentiableMap + ?Sized>(
    m: &M,
    p: &[f64],
    i: usize,
    j: usize,
) -> Result<f64> {
    let hi = fd_step(p[i - 1]);
    if i == j {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[i - 1] += hi;
        minus[i - 1] -= hi;
        return Ok((m.value(&plus)? - 2.0 * m.value(p)? + m.value(&minus)?) / (hi * hi));
    }
    let hj = fd_step(p[j - 1]);
    let at = |si: f64, sj: f64| {
        let mut q = p.to_vec();
        q[i - 1] += si * hi;
        q[j - 1] += sj * hj;
        m.value(&q)
    };
    Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * hi * hj))
}

/// Magnitudes of the terms in the closed forms of `F_i` and `F_ij`.
fn term_scales(q: &RationalQuasigroup, p: &[f64], i: usize, j: usize) -> Result<(f64, f64)> {
    let s = q.denominator(p)?.abs();
    let g = q.numerator(p).abs();
    let (_, di, ddi) = q.func(i).eval_jet(&p[i - 1]);
    let (_, dj, _) = q.func(j).eval_jet(&p[j - 1]);
    let first = di.abs() / s + g / (s * s);
    let second = if i == j {
        ddi.abs() / s + 2.0 * (di.abs() * s + g) / (s * s * s)
    } else {
        ((di.abs() + dj.abs()) * s + 2.0 * g) / (s * s * s)
    };
    Ok((first, second))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub cases: usize,
    pub jet_tol: f64,
    pub fd_tol: f64,
    pub max_jet_error: f64,
    pub max_fd_error: f64,
    pub jet_failures: usize,
    pub fd_failures: usize,
}

impl DerivativeReport {
    pub fn passed(&self) -> bool {
        self.jet_failures == 0 && self.fd_failures == 0
    }
}

/// Compares the three derivative routes on `cases` random
/// (instance, regular point, direction pair) triples.
pub fn derivative_suite(
    cases: usize,
    seed: u64,
    jet_tol: f64,
    fd_tol: f64,
) -> Result<DerivativeReport> {
    let mut report = DerivativeReport {
        cases,
        jet_tol,
        fd_tol,
        max_jet_error: 0.0,
        max_fd_error: 0.0,
        jet_failures: 0,
        fd_failures: 0,
    };
    let gen = GeneratorConfig::default();
    let mut rng = substream(seed, 0xD1FF);
    let mut done = 0;
    let mut attempts = 0;
    while done < cases {
        attempts += 1;
        if attempts > 100 * cases + 1000 {
            return Err(Error::InvalidArgument(
                "could not draw regular derivative cases".into(),
            ));
        }
        let q = generate_instance(&mut rng, &gen).quasigroup;
        if q.solvability_check().is_err() {
            continue;
        }
        let n = q.arity();
        let domain = SampleBox::default_for(&q);
        let p = domain.sample(&mut rng);
        let i = rand::Rng::random_range(&mut rng, 1..=n);
        let j = rand::Rng::random_range(&mut rng, 1..=n);
        // keep the finite-difference stencil away from the singular hyperplane
        let s: f64 = match q.denominator(&p) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if s.abs() < 0.5 {
            continue;
        }
        let closed = q.jet(&p, (i, j))?;
        let generic = q.to_generic_map().jet_eval(&p, (i, j))?;
        let fd1 = fd_first(&q, &p, i)?;
        let fd2 = fd_second(&q, &p, i, j)?;
        let (first_scale, second_scale) = term_scales(&q, &p, i, j)?;

        let jet_err = relative_error(closed.value, generic.value, q.numerator(&p).abs() / s.abs())
            .max(relative_error(closed.d_i, generic.d_i, first_scale))
            .max(relative_error(closed.d_ij, generic.d_ij, second_scale));
        let fd_err = relative_error(closed.d_i, fd1, first_scale)
            .max(relative_error(generic.d_i, fd1, first_scale))
            .max(relative_error(closed.d_ij, fd2, second_scale))
            .max(relative_error(generic.d_ij, fd2, second_scale));
        report.max_jet_error = report.max_jet_error.max(jet_err);
        report.max_fd_error = report.max_fd_error.max(fd_err);
        report.jet_failures += usize::from(jet_err.is_nan() || jet_err > jet_tol);
        report.fd_failures += usize::from(fd_err.is_nan() || fd_err > fd_tol);
        done += 1;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub tol: f64,
    pub agreement: AgreementReport,
    pub derivatives: DerivativeReport,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Exact-vs-jet tolerance never looser than `1e-10`, tightened by `tol`.
pub fn jet_tolerance(tol: f64) -> f64 {
    tol.min(1e-10)
}

pub const FD_TOL: f64 = 1e-5;
pub const DERIVATIVE_CASES: usize = 1000;

/// Cross-validation plus the derivative suite.
pub fn run_verify(cfg: &CrossValidationConfig) -> Result<VerifyReport> {
    let agreement = cross_validate(cfg)?;
    let derivatives = derivative_suite(DERIVATIVE_CASES, cfg.seed, jet_tolerance(cfg.tol), FD_TOL)?;
    let mut warnings = Vec::new();
    if cfg.trials == 0 {
        warnings.push("zero trials requested: agreement check is vacuous".to_string());
    }
    Ok(VerifyReport {
        seed: cfg.seed,
        tol: cfg.tol,
        passed: agreement.all_agree() && derivatives.passed(),
        agreement,
        derivatives,
        warnings,
    })
}
