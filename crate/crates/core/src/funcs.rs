//! Exact univariate polynomials used as the component functions `f_i`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational_field, rational_to_f64, Scalar};

/// Default bound on the degree of a component function.
pub const DEFAULT_MAX_DEGREE: usize = 16;

/// A polynomial with arbitrary-precision rational coefficients in ascending
/// order (`coeffs[k]` multiplies `x^k`). Trailing zeros are never stored, so
/// the zero polynomial has no coefficients.
#[derive(Clone, Debug, Default)]
pub struct UnivariateFunction {
    coeffs: Vec<BigRational>,
    approx: Vec<f64>,
}

impl PartialEq for UnivariateFunction {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for UnivariateFunction {}

impl std::hash::Hash for UnivariateFunction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl UnivariateFunction {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        Self::with_max_degree(coeffs, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(coeffs: Vec<BigRational>, max_degree: usize) -> Result<Self> {
        let f = Self::from_coeffs_unchecked(coeffs);
        match f.degree() {
            Some(d) if d > max_degree => Err(Error::DegreeTooHigh {
                degree: d,
                max: max_degree,
            }),
            _ => Ok(f),
        }
    }

    fn from_coeffs_unchecked(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        let approx = coeffs.iter().map(rational_to_f64).collect();
        UnivariateFunction { coeffs, approx }
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs_unchecked(coeffs.iter().map(|&c| crate::scalar::int(c)).collect())
    }

    pub fn zero() -> Self {
        UnivariateFunction::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs_unchecked(vec![c])
    }

    /// `slope * x + intercept`
    pub fn affine(slope: BigRational, intercept: BigRational) -> Self {
        Self::from_coeffs_unchecked(vec![intercept, slope])
    }

    /// The monomial `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = BigRational::one();
        Self::from_coeffs_unchecked(coeffs)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(k.into()))
            .collect();
        Self::from_coeffs_unchecked(coeffs)
    }

    pub fn eval<T: Scalar>(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .zip(&self.approx)
            .rev()
            .fold(T::zero(), |acc, (c, &a)| {
                acc * x.clone() + T::from_coeff(c, a)
            })
    }

    /// Value, first and second derivative at `x` in one Horner pass.
    pub fn eval_jet<T: Scalar>(&self, x: &T) -> (T, T, T) {
        let two = T::from_i64(2);
        let (mut p, mut dp, mut ddp) = (T::zero(), T::zero(), T::zero());
        for (c, &a) in self.coeffs.iter().zip(&self.approx).rev() {
            ddp = ddp * x.clone() + two.clone() * dp.clone();
            dp = dp * x.clone() + p.clone();
            p = p * x.clone() + T::from_coeff(c, a);
        }
        (p, dp, ddp)
    }

    /// `(c, d)` with `f = c*x + d` when the degree is at most one.
    pub fn linear_slope(&self) -> Option<(BigRational, BigRational)> {
        if self.coeffs.len() > 2 {
            return None;
        }
        Some((self.coeff(1), self.coeff(0)))
    }

    /// `f(scale * x + offset)`, computed exactly.
    pub fn compose_affine(&self, scale: &BigRational, offset: &BigRational) -> Self {
        let inner = UnivariateFunction::affine(scale.clone(), offset.clone());
        self.coeffs
            .iter()
            .rev()
            .fold(UnivariateFunction::zero(), |acc, c| {
                &(&acc * &inner) + &UnivariateFunction::constant(c.clone())
            })
    }

    /// Taylor shift `f(x + s)`.
    pub fn shift(&self, s: &BigRational) -> Self {
        self.compose_affine(&BigRational::one(), s)
    }

    pub fn to_f64_coeffs(&self) -> &[f64] {
        &self.approx
    }

    /// Parses the `{"poly": [...]}` form; `field` prefixes error locations.
    pub fn from_json_value(field: &str, value: &serde_json::Value) -> Result<Self> {
        let poly = value
            .get("poly")
            .ok_or_else(|| Error::parse(field, "expected an object with a \"poly\" array"))?;
        let items = poly
            .as_array()
            .ok_or_else(|| Error::parse(format!("{field}.poly"), "expected an array"))?;
        let mut coeffs = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            let path = format!("{field}.poly[{k}]");
            let c = match item {
                serde_json::Value::String(s) => parse_rational_field(&path, s)?,
                serde_json::Value::Number(n) if n.is_i64() => {
                    crate::scalar::int(n.as_i64().unwrap_or_default())
                }
                _ => return Err(Error::parse(path, "expected an integer or \"p/q\" string")),
            };
            coeffs.push(c);
        }
        UnivariateFunction::new(coeffs).map_err(|e| Error::parse(field, e.to_string()))
    }
}

impl Add for &UnivariateFunction {
    type Output = UnivariateFunction;

    fn add(self, rhs: Self) -> UnivariateFunction {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        UnivariateFunction::from_coeffs_unchecked(coeffs)
    }
}

impl Sub for &UnivariateFunction {
    type Output = UnivariateFunction;

    fn sub(self, rhs: Self) -> UnivariateFunction {
        self + &(-rhs)
    }
}

impl Neg for &UnivariateFunction {
    type Output = UnivariateFunction;

    fn neg(self) -> UnivariateFunction {
        UnivariateFunction {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            approx: self.approx.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &UnivariateFunction {
    type Output = UnivariateFunction;

    fn mul(self, rhs: Self) -> UnivariateFunction {
        if self.is_zero() || rhs.is_zero() {
            return UnivariateFunction::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UnivariateFunction::from_coeffs_unchecked(coeffs)
    }
}

impl fmt::Display for UnivariateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let c = format_rational(c);
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}x")?,
                _ => write!(f, "{c}x^{k}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    poly: Vec<String>,
}

impl Serialize for UnivariateFunction {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            poly: self.coeffs.iter().map(format_rational).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnivariateFunction {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        let coeffs = repr
            .poly
            .iter()
            .enumerate()
            .map(|(k, s)| parse_rational_field(&format!("poly[{k}]"), s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        UnivariateFunction::new(coeffs).map_err(serde::de::Error::custom)
    }
}

/// A floating value/first/second-derivative evaluator for a component
/// function. Accepted by the numeric paths only; the exact classifier needs
/// a [`UnivariateFunction`].
pub trait JetFunction: Send + Sync {
    fn jet(&self, x: f64) -> (f64, f64, f64);
}

impl JetFunction for UnivariateFunction {
    fn jet(&self, x: f64) -> (f64, f64, f64) {
        self.eval_jet(&x)
    }
}

/// Black-box component function given by a closure returning
/// `(f(x), f'(x), f''(x))`.
#[derive(Clone)]
pub struct OpaqueFunction {
    eval: Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>,
}

impl OpaqueFunction {
    pub fn new(eval: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static) -> Self {
        OpaqueFunction {
            eval: Arc::new(eval),
        }
    }
}

impl fmt::Debug for OpaqueFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OpaqueFunction")
    }
}

impl JetFunction for OpaqueFunction {
    fn jet(&self, x: f64) -> (f64, f64, f64) {
        (self.eval)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use proptest::prelude::*;

    fn poly(c: &[i64]) -> UnivariateFunction {
        UnivariateFunction::from_ints(c)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(poly(&[0, 0, 1]).derivative(), poly(&[0, 2]));
        assert_eq!(poly(&[5]).derivative(), UnivariateFunction::zero());
        assert_eq!(poly(&[0, 1, 0, 2]).derivative(), poly(&[1, 0, 6]));
    }

    #[test]
    fn eval_jet_examples() {
        assert_eq!(
            poly(&[0, 0, 0, 1]).eval_jet(&int(2)),
            (int(8), int(12), int(12))
        );
        assert_eq!(UnivariateFunction::zero().eval_jet(&3.5), (0.0, 0.0, 0.0));
        assert_eq!(poly(&[0, 0, 1]).eval_jet(&1.0), (1.0, 2.0, 2.0));
    }

    #[test]
    fn linear_slope_examples() {
        assert_eq!(poly(&[0, 3]).linear_slope(), Some((int(3), int(0))));
        assert_eq!(poly(&[5, 2]).linear_slope(), Some((int(2), int(5))));
        assert_eq!(poly(&[0, 0, 1]).linear_slope(), None);
        assert_eq!(
            UnivariateFunction::zero().linear_slope(),
            Some((int(0), int(0)))
        );
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let f = poly(&[1, 2, 0, 0]);
        assert_eq!(f.degree(), Some(1));
        assert_eq!(poly(&[0, 0]).degree(), None);
    }

    #[test]
    fn degree_limit_is_enforced() {
        let coeffs = vec![int(1); 18];
        assert_eq!(
            UnivariateFunction::new(coeffs.clone()),
            Err(Error::DegreeTooHigh {
                degree: 17,
                max: 16
            })
        );
        assert!(UnivariateFunction::with_max_degree(coeffs, 17).is_ok());
    }

    #[test]
    fn shift_matches_substitution() {
        // (x - 1) + 4 from f(x) = x
        let f = poly(&[0, 1]).shift(&int(-1));
        assert_eq!(&f + &poly(&[4]), poly(&[3, 1]));
        // (x + 1)^2 - 1 = x^2 + 2x
        let g = &poly(&[0, 0, 1]).shift(&int(1)) - &poly(&[1]);
        assert_eq!(g, poly(&[0, 2, 1]));
        let h = poly(&[1, 0, 1]).compose_affine(&int(-1), &rat(1, 2));
        assert_eq!(h.eval(&int(3)), poly(&[1, 0, 1]).eval(&rat(-5, 2)));
    }

    #[test]
    fn json_round_trip() {
        let f = UnivariateFunction::new(vec![rat(1, 2), int(0), int(-3)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"poly":["1/2","0","-3"]}"#);
        let back: UnivariateFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn json_errors_name_the_coefficient() {
        let v: serde_json::Value = serde_json::from_str(r#"{"poly": ["1", "x"]}"#).unwrap();
        let err = UnivariateFunction::from_json_value("f[2]", &v).unwrap_err();
        assert!(err.to_string().contains("f[2].poly[1]"), "{err}");
    }

    fn arb_poly() -> impl Strategy<Value = UnivariateFunction> {
        prop::collection::vec((-20i64..20, 1i64..5), 0..7).prop_map(|cs| {
            UnivariateFunction::from_coeffs_unchecked(
                cs.into_iter().map(|(n, d)| rat(n, d)).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn derivative_is_linear(f in arb_poly(), g in arb_poly()) {
            prop_assert_eq!((&f + &g).derivative(), &f.derivative() + &g.derivative());
        }

        #[test]
        fn jet_first_matches_derivative_value(f in arb_poly(), n in -50i64..50, d in 1i64..7) {
            let x = rat(n, d);
            let (_, d1, d2) = f.eval_jet(&x);
            prop_assert_eq!(d1, f.derivative().eval(&x));
            prop_assert_eq!(d2, f.derivative().derivative().eval(&x));
        }

        #[test]
        fn slope_present_iff_derivative_constant(f in arb_poly()) {
            prop_assert_eq!(f.linear_slope().is_some(), f.derivative().is_constant());
        }
    }
}
