//! Sampled verification of reducibility conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::residual::residual;
use super::{ConditionTriple, ReducibilityStructure};
use crate::error::{Error, Result};
use crate::quasigroup::{DifferentiableMap, RationalQuasigroup};

/// Default verdict threshold on the normalized residual.
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 64;

/// Axis-aligned sampling box, one `(lo, hi)` per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBox {
    bounds: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "box coordinate {} needs finite lo < hi, got {lo}:{hi}",
                    k + 1
                )));
            }
        }
        Ok(SampleBox { bounds })
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); n])
    }

    /// `[-2, 2]^n`, moved to `[3, 7]^n` when the denominator constant is zero
    /// so the singular hyperplane stays far away.
    pub fn default_for(q: &RationalQuasigroup) -> Self {
        use num_traits::Zero;
        let shift = if q.denom_shift().is_zero() { 5.0 } else { 0.0 };
        SampleBox {
            bounds: vec![(-2.0 + shift, 2.0 + shift); q.arity()],
        }
    }

    /// Parses `"lo:hi,lo:hi,..."`; a single `lo:hi` is repeated to `n`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut bounds = Vec::new();
        for (k, part) in text.split(',').enumerate() {
            let (lo, hi) = part.split_once(':').ok_or_else(|| {
                Error::parse(format!("box[{k}]"), format!("expected lo:hi, got {part:?}"))
            })?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(format!("box[{k}]"), format!("bad number {s:?}")))
            };
            bounds.push((parse(lo)?, parse(hi)?));
        }
        if bounds.len() == 1 {
            bounds = vec![bounds[0]; n];
        }
        if bounds.len() != n {
            return Err(Error::parse(
                "box",
                format!("expected 1 or {n} ranges, found {}", bounds.len()),
            ));
        }
        Self::new(bounds)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub samples: usize,
    #[serde(rename = "box")]
    pub domain: SampleBox,
    pub seed: u64,
    pub tol: f64,
}

impl SamplerConfig {
    pub fn new(samples: usize, domain: SampleBox, seed: u64, tol: f64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {tol}"
            )));
        }
        Ok(SamplerConfig {
            samples,
            domain,
            seed,
            tol,
        })
    }

    pub fn default_for(q: &RationalQuasigroup, seed: u64) -> Self {
        SamplerConfig {
            samples: DEFAULT_SAMPLES,
            domain: SampleBox::default_for(q),
            seed,
            tol: DEFAULT_TOL,
        }
    }

    /// Rejected draws allowed before the box is declared singular.
    pub fn retry_cap(&self) -> usize {
        100 * self.samples + 1000
    }
}

/// Deterministic substream for one condition, independent of evaluation order.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn triple_stream(t: ConditionTriple) -> u64 {
    ((t.a as u64) << 42) | ((t.b as u64) << 21) | t.p as u64
}

/// Draws a regular point: rejection sampling against singular evaluations.
pub(crate) fn draw_regular<R, F, T>(
    cfg: &SamplerConfig,
    rng: &mut R,
    attempts: &mut usize,
    mut f: F,
) -> Result<T>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<T>,
{
    loop {
        let p = cfg.domain.sample(rng);
        match f(&p) {
            Err(Error::SingularPoint {
                denominator,
                threshold,
            }) => {
                *attempts += 1;
                if *attempts > cfg.retry_cap() {
                    return Err(Error::SingularPoint {
                        denominator,
                        threshold,
                    });
                }
            }
            other => return other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TripleReport {
    pub a: usize,
    pub b: usize,
    pub p: usize,
    pub samples: usize,
    pub max_rho: f64,
    pub mean_rho: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub structure: String,
    pub tol: f64,
    pub seed: u64,
    pub holds: bool,
    pub triples: Vec<TripleReport>,
}

impl ResidualReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    /// One row per condition: `a,b,p,samples,max_rho,mean_rho,verdict`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["a", "b", "p", "samples", "max_rho", "mean_rho", "verdict"])
            .map_err(io)?;
        for t in &self.triples {
            w.write_record([
                t.a.to_string(),
                t.b.to_string(),
                t.p.to_string(),
                t.samples.to_string(),
                t.max_rho.to_string(),
                t.mean_rho.to_string(),
                if t.holds { "holds" } else { "fails" }.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Evaluates one condition at `cfg.samples` regular points.
pub fn check_triple<M: DifferentiableMap + ?Sized>(
    target: &M,
    t: ConditionTriple,
    cfg: &SamplerConfig,
) -> Result<TripleReport> {
    let mut rng = substream(cfg.seed, triple_stream(t));
    let mut attempts = 0;
    let (mut max_rho, mut sum_rho) = (0.0f64, 0.0);
    for _ in 0..cfg.samples {
        let r = draw_regular(cfg, &mut rng, &mut attempts, |p| residual(target, t, p))?;
        // NaN must not read as "holds"
        let rho = if r.normalized.is_nan() {
            f64::INFINITY
        } else {
            r.normalized
        };
        max_rho = max_rho.max(rho);
        sum_rho += rho;
    }
    Ok(TripleReport {
        a: t.a,
        b: t.b,
        p: t.p,
        samples: cfg.samples,
        max_rho,
        mean_rho: sum_rho / cfg.samples as f64,
        holds: max_rho <= cfg.tol,
    })
}

/// Checks every condition generated by `structure` against `target`.
pub fn check_structure<M: DifferentiableMap + ?Sized>(
    target: &M,
    structure: &ReducibilityStructure,
    cfg: &SamplerConfig,
) -> Result<ResidualReport> {
    if structure.arity() != target.arity() {
        return Err(Error::InvalidStructure(format!(
            "structure has arity {}, target has arity {}",
            structure.arity(),
            target.arity()
        )));
    }
    if cfg.domain.dim() != target.arity() {
        return Err(Error::InvalidArgument(format!(
            "sampling box has {} coordinates, target has arity {}",
            cfg.domain.dim(),
            target.arity()
        )));
    }
    let triples = structure
        .conditions()
        .into_iter()
        .map(|t| check_triple(target, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport {
        structure: structure.to_string(),
        tol: cfg.tol,
        seed: cfg.seed,
        holds: triples.iter().all(|t| t.holds),
        triples,
    })
}
