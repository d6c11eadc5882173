//! Cross-multiplied reducibility residuals.

use num_rational::BigRational;

use super::ConditionTriple;
use crate::error::Result;
use crate::quasigroup::{DifferentiableMap, RationalQuasigroup};
use crate::scalar::Scalar;

/// Offset keeping the normalized residual finite where every term vanishes.
pub const RESIDUAL_TAU: f64 = 1e-30;

/// `raw = F_pa F_b - F_pb F_a` and
/// `normalized = |raw| / (|F_pa F_b| + |F_pb F_a| + tau)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub raw: f64,
    pub normalized: f64,
    /// `|F_pa F_b| + |F_pb F_a|`, the magnitude of the cancelling terms.
    pub scale: f64,
}

pub fn residual<M: DifferentiableMap + ?Sized>(
    target: &M,
    t: ConditionTriple,
    p: &[f64],
) -> Result<Residual> {
    let ja = target.jet(p, (t.a, t.p))?;
    let jb = target.jet(p, (t.b, t.p))?;
    let lhs = ja.d_ij * jb.d_i;
    let rhs = jb.d_ij * ja.d_i;
    let raw = lhs - rhs;
    let scale = lhs.abs() + rhs.abs();
    Ok(Residual {
        raw,
        normalized: raw.abs() / (scale + RESIDUAL_TAU),
        scale,
    })
}

/// Exact cross-multiplied residual from the closed-form partials.
pub fn residual_exact(
    q: &RationalQuasigroup,
    t: ConditionTriple,
    p: &[BigRational],
) -> Result<BigRational> {
    let [_, fa, _, fpa] = q.partials(p, t.a, t.p)?;
    let [_, fb, _, fpb] = q.partials(p, t.b, t.p)?;
    Ok(fpa * fb - fpb * fa)
}

/// The factored form
/// `(f_a'(x_a) - f_b'(x_b)) * (f_p'(x_p) S - G)` with `S = sum x + a` and
/// `G = sum f + A`. The residual equals this divided by `S^4`.
pub fn factored_residual<T: Scalar>(
    q: &RationalQuasigroup,
    t: ConditionTriple,
    p: &[T],
) -> Result<T> {
    let s = q.denominator(p)?;
    let g = q.numerator(p);
    let da = q.func(t.a).eval_jet(&p[t.a - 1]).1;
    let db = q.func(t.b).eval_jet(&p[t.b - 1]).1;
    let dp = q.func(t.p).eval_jet(&p[t.p - 1]).1;
    Ok((da - db) * (dp * s - g))
}
