//! Sparse multivariate polynomials with rational coefficients.
//!
//! Only what the exact decisions need: building expressions out of
//! univariate pieces, ring operations, and an identically-zero test.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::funcs::UnivariateFunction;

/// Exponent vector of length `nvars`.
type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `f(x_var)` where `var` is zero-based.
    pub fn univariate(nvars: usize, var: usize, f: &UnivariateFunction) -> Self {
        assert!(
            var < nvars,
            "variable {var} out of range for {nvars} variables"
        );
        let mut p = Self::zero(nvars);
        for (k, c) in f.coeffs().iter().enumerate() {
            let mut m = vec![0; nvars];
            m[var] = k as u32;
            p.add_term(m, c.clone());
        }
        p
    }

    /// The coordinate `x_var` (zero-based).
    pub fn var(nvars: usize, var: usize) -> Self {
        Self::univariate(nvars, var, &UnivariateFunction::monomial(1))
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        total
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: Self) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        self.scale(&-BigRational::one())
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: Self) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: Self) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn cancellation_yields_zero() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let lhs = &(&x + &y) * &(&x - &y);
        let rhs = &(&x * &x) - &(&y * &y);
        assert!((&lhs - &rhs).is_zero());
        assert!(!lhs.is_zero());
    }

    #[test]
    fn univariate_embedding_evaluates() {
        let f = UnivariateFunction::from_ints(&[1, 0, 3]);
        let p = MultiPoly::univariate(3, 2, &f);
        assert_eq!(p.eval(&[int(9), int(9), rat(1, 3)]), rat(4, 3));
    }
}
