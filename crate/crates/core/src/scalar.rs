//! Scalar abstraction shared by the exact (rational) and floating paths.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A field the quasigroup formulas can be evaluated over.
///
/// Implemented for `f64` (the sampling fast path) and [`BigRational`]
/// (exact evaluation at rational points).
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> {
    fn from_rational(r: &BigRational) -> Self;

    /// Picks between an exact coefficient and its cached floating
    /// approximation, so the floating path never converts rationals.
    fn from_coeff(exact: &BigRational, approx: f64) -> Self;

    /// Approximate magnitude, used for the singular-point guard.
    fn magnitude(&self) -> f64;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn from_coeff(_exact: &BigRational, approx: f64) -> Self {
        approx
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_coeff(exact: &BigRational, _approx: f64) -> Self {
        exact.clone()
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow of both parts; fall back to a ratio of floats.
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    })
}

/// Exact rational from an `f64` (every finite double is a dyadic rational).
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"7"`, `"-3"`, `"2/5"` or a terminating decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n =
            BigInt::from_str_radix(n.trim(), 10).map_err(|_| format!("bad numerator in {s:?}"))?;
        let d = BigInt::from_str_radix(d.trim(), 10)
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let mut n =
            BigInt::from_str_radix(&digits, 10).map_err(|_| format!("bad decimal {s:?}"))?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, d));
    }
    BigInt::from_str_radix(t, 10)
        .map(BigRational::from_integer)
        .map_err(|_| format!("bad rational {s:?}"))
}

pub fn parse_rational_field(field: &str, s: &str) -> Result<BigRational> {
    parse_rational(s).map_err(|m| Error::parse(field, m))
}

/// Lowest-terms text form: `"3"` or `"-2/5"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
