//! The rational family `F = (f_1(x_1) + ... + f_n(x_n) + A) / (x_1 + ... + x_n + a)`,
//! generic maps, and their first and second partial derivatives.
//!
//! Variable indices in this API are 1-based, matching `x_1, ..., x_n`.

mod generic;
mod jet;
mod spec;

pub use generic::{Expr, GenericMap};
pub use jet::Jet2;

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::funcs::{JetFunction, UnivariateFunction};
use crate::multipoly::MultiPoly;
use crate::scalar::{rational_to_f64, Scalar};

/// Points with `|x_1 + ... + x_n + a|` below this are treated as singular.
pub const DEFAULT_EPS_SING: f64 = 1e-6;

/// A map whose value, first partials and mixed second partials can be
/// evaluated in floating point. Residual checks run against this.
pub trait DifferentiableMap: Send + Sync {
    fn arity(&self) -> usize;

    /// Jet along `dirs` at `p`. Fails with [`Error::SingularPoint`] off the
    /// regular domain.
    fn jet(&self, p: &[f64], dirs: (usize, usize)) -> Result<Jet2>;

    fn value(&self, p: &[f64]) -> Result<f64> {
        self.jet(p, (1, 1)).map(|j| j.value)
    }
}

impl DifferentiableMap for GenericMap {
    fn arity(&self) -> usize {
        GenericMap::arity(self)
    }

    fn jet(&self, p: &[f64], dirs: (usize, usize)) -> Result<Jet2> {
        self.jet_eval(p, dirs)
    }
}

/// Closed-form `(F, F_i, F_j, F_ij)` from `S`, `G`, `f_i'`, `f_j'` and, for
/// `i == j`, `f_i''`.
fn closed_form<T: Scalar>(s: T, g: T, di: T, dj: T, ddi: T, same: bool) -> [T; 4] {
    let two = T::from_i64(2);
    let s2 = s.clone() * s.clone();
    let s3 = s2.clone() * s.clone();
    let num_i = di.clone() * s.clone() - g.clone();
    let num_j = dj.clone() * s.clone() - g.clone();
    let f_ij = if same {
        ddi / s.clone() - two * num_i.clone() / s3
    } else {
        (two * g.clone() - (di + dj) * s.clone()) / s3
    };
    [g / s, num_i / s2.clone(), num_j / s2, f_ij]
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        Err(Error::InvalidArgument(format!("index {i} outside 1..={n}")))
    } else {
        Ok(())
    }
}

/// An instance of the rational family with numerator constant `A` and
/// denominator constant `a`. `A = a = 0` is the basic family.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalQuasigroup {
    funcs: Vec<UnivariateFunction>,
    numer_shift: BigRational,
    denom_shift: BigRational,
    numer_approx: f64,
    denom_approx: f64,
    eps_sing: f64,
}

impl RationalQuasigroup {
    /// Builds an instance and rejects it if it is not locally solvable.
    pub fn new(
        funcs: Vec<UnivariateFunction>,
        numer_shift: BigRational,
        denom_shift: BigRational,
    ) -> Result<Self> {
        let q = Self::new_unchecked(funcs, numer_shift, denom_shift)?;
        q.solvability_check()?;
        Ok(q)
    }

    /// Builds an instance without the solvability check, so degenerate maps
    /// can still be classified. Only the arity is validated.
    pub fn new_unchecked(
        funcs: Vec<UnivariateFunction>,
        numer_shift: BigRational,
        denom_shift: BigRational,
    ) -> Result<Self> {
        if funcs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "arity must be at least 2, got {}",
                funcs.len()
            )));
        }
        Ok(RationalQuasigroup {
            funcs,
            numer_approx: rational_to_f64(&numer_shift),
            denom_approx: rational_to_f64(&denom_shift),
            numer_shift,
            denom_shift,
            eps_sing: DEFAULT_EPS_SING,
        })
    }

    /// The basic family with `A = a = 0`.
    pub fn homogeneous(funcs: Vec<UnivariateFunction>) -> Result<Self> {
        Self::new(funcs, BigRational::zero(), BigRational::zero())
    }

    pub fn with_eps_sing(mut self, eps: f64) -> Self {
        self.eps_sing = eps;
        self
    }

    pub fn arity(&self) -> usize {
        self.funcs.len()
    }

    pub fn funcs(&self) -> &[UnivariateFunction] {
        &self.funcs
    }

    /// `f_i`, 1-based.
    pub fn func(&self, i: usize) -> &UnivariateFunction {
        &self.funcs[i - 1]
    }

    /// The constant `A` added to the numerator.
    pub fn numer_shift(&self) -> &BigRational {
        &self.numer_shift
    }

    /// The constant `a` added to the denominator.
    pub fn denom_shift(&self) -> &BigRational {
        &self.denom_shift
    }

    pub fn eps_sing(&self) -> f64 {
        self.eps_sing
    }

    fn check_point<T>(&self, p: &[T]) -> Result<()> {
        if p.len() != self.arity() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, quasigroup has arity {}",
                p.len(),
                self.arity()
            )));
        }
        Ok(())
    }

    /// `x_1 + ... + x_n + a`, guarded against the singular hyperplane.
    pub fn denominator<T: Scalar>(&self, p: &[T]) -> Result<T> {
        self.check_point(p)?;
        let s = p.iter().fold(
            T::from_coeff(&self.denom_shift, self.denom_approx),
            |acc, x| acc + x.clone(),
        );
        let m = s.magnitude();
        if m < self.eps_sing || !m.is_finite() {
            return Err(Error::SingularPoint {
                denominator: m,
                threshold: self.eps_sing,
            });
        }
        Ok(s)
    }

    /// `f_1(x_1) + ... + f_n(x_n) + A`.
    pub fn numerator<T: Scalar>(&self, p: &[T]) -> T {
        self.funcs.iter().zip(p).fold(
            T::from_coeff(&self.numer_shift, self.numer_approx),
            |acc, (f, x)| acc + f.eval(x),
        )
    }

    pub fn is_regular<T: Scalar>(&self, p: &[T]) -> bool {
        self.denominator(p).is_ok()
    }

    pub fn eval<T: Scalar>(&self, p: &[T]) -> Result<T> {
        let s = self.denominator(p)?;
        Ok(self.numerator(p) / s)
    }

    /// Closed-form `(F, F_i, F_j, F_ij)`. Exact when `T` is rational.
    pub fn partials<T: Scalar>(&self, p: &[T], i: usize, j: usize) -> Result<[T; 4]> {
        check_index(i, self.arity())?;
        check_index(j, self.arity())?;
        let s = self.denominator(p)?;
        let g = self.numerator(p);
        let (_, di, ddi) = self.funcs[i - 1].eval_jet(&p[i - 1]);
        let (_, dj, _) = self.funcs[j - 1].eval_jet(&p[j - 1]);
        Ok(closed_form(s, g, di, dj, ddi, i == j))
    }

    /// `F_i = (f_i' S - G) / S^2`.
    pub fn first_partial<T: Scalar>(&self, i: usize, p: &[T]) -> Result<T> {
        let [_, fi, _, _] = self.partials(p, i, i)?;
        Ok(fi)
    }

    /// `F_ij`; for `i == j` the pure second partial.
    pub fn mixed_second_partial<T: Scalar>(&self, i: usize, j: usize, p: &[T]) -> Result<T> {
        let [_, _, _, fij] = self.partials(p, i, j)?;
        Ok(fij)
    }

    /// Numerator of `F_i` as an exact polynomial in `x_1..x_n`:
    /// `f_i'(x_i) (x_1 + ... + x_n + a) - (f_1(x_1) + ... + f_n(x_n) + A)`.
    pub fn partial_numerator_poly(&self, i: usize) -> MultiPoly {
        let n = self.arity();
        let mut s = MultiPoly::constant(n, self.denom_shift.clone());
        let mut g = MultiPoly::constant(n, self.numer_shift.clone());
        for (k, f) in self.funcs.iter().enumerate() {
            s = &s + &MultiPoly::var(n, k);
            g = &g + &MultiPoly::univariate(n, k, f);
        }
        let di = MultiPoly::univariate(n, i - 1, &self.funcs[i - 1].derivative());
        &(&di * &s) - &g
    }

    /// Indices whose partial numerator vanishes identically.
    pub fn degenerate_indices(&self) -> Vec<usize> {
        (1..=self.arity())
            .filter(|&i| self.partial_numerator_poly(i).is_zero())
            .collect()
    }

    /// Decides local solvability exactly.
    pub fn solvability_check(&self) -> Result<()> {
        let bad = self.degenerate_indices();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NotAQuasigroup { indices: bad })
        }
    }

    /// Isotopic instance with `A = a = 0`: substitutes `x_n + a -> x_n` and
    /// replaces `f_n` by `f_n(x - a) + A`. Points map by `x_n -> x_n + a`.
    pub fn isotopy_normalize(&self) -> Self {
        let mut funcs = self.funcs.clone();
        let last = funcs.len() - 1;
        let shifted = funcs[last].shift(&-self.denom_shift.clone());
        funcs[last] = &shifted + &UnivariateFunction::constant(self.numer_shift.clone());
        RationalQuasigroup {
            funcs,
            numer_shift: BigRational::zero(),
            denom_shift: BigRational::zero(),
            numer_approx: 0.0,
            denom_approx: 0.0,
            eps_sing: self.eps_sing,
        }
    }

    /// Maps a point of `self` to the matching point of [`Self::isotopy_normalize`].
    pub fn isotopy_shift_point<T: Scalar>(&self, p: &[T]) -> Vec<T> {
        let mut q = p.to_vec();
        if let Some(last) = q.last_mut() {
            *last = last.clone() + T::from_coeff(&self.denom_shift, self.denom_approx);
        }
        q
    }

    /// Applies an index permutation: `f'_{perm[k]} = f_k` (1-based entries).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.arity();
        let mut seen = vec![false; n];
        for &t in perm {
            if t == 0 || t > n || std::mem::replace(&mut seen[t - 1], true) {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation of 1..={n}"
                )));
            }
        }
        if perm.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 1..={n}"
            )));
        }
        let mut funcs = vec![UnivariateFunction::zero(); n];
        for (k, &t) in perm.iter().enumerate() {
            funcs[t - 1] = self.funcs[k].clone();
        }
        Ok(RationalQuasigroup {
            funcs,
            ..self.clone()
        })
    }

    /// Expression-tree encoding with floating coefficients.
    pub fn to_generic_map(&self) -> GenericMap {
        let mut numer = Vec::new();
        for (k, f) in self.funcs.iter().enumerate() {
            for (e, c) in f.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let c = Expr::Const(rational_to_f64(c));
                numer.push(match e {
                    0 => c,
                    1 => Expr::Mul(vec![c, Expr::Var(k + 1)]),
                    _ => Expr::Mul(vec![c, Expr::Pow(Box::new(Expr::Var(k + 1)), e as i32)]),
                });
            }
        }
        numer.push(Expr::Const(rational_to_f64(&self.numer_shift)));
        let mut denom: Vec<Expr> = (1..=self.arity()).map(Expr::Var).collect();
        denom.push(Expr::Const(rational_to_f64(&self.denom_shift)));
        let root = Expr::Div(Box::new(Expr::Add(numer)), Box::new(Expr::Add(denom)));
        GenericMap::new(self.arity(), root)
            .map(|m| m.with_eps_sing(self.eps_sing))
            .unwrap_or_else(|_| unreachable!("variables are in range by construction"))
    }
}

impl DifferentiableMap for RationalQuasigroup {
    fn arity(&self) -> usize {
        RationalQuasigroup::arity(self)
    }

    fn jet(&self, p: &[f64], dirs: (usize, usize)) -> Result<Jet2> {
        let [value, d_i, d_j, d_ij] = self.partials(p, dirs.0, dirs.1)?;
        Ok(Jet2 {
            value,
            d_i,
            d_j,
            d_ij,
            dirs,
        })
    }
}

/// Rational-family map over black-box component functions. Usable by the
/// sampled residual checks but not by the exact classifier.
#[derive(Clone)]
pub struct NumericRationalMap {
    funcs: Vec<Arc<dyn JetFunction>>,
    numer_shift: f64,
    denom_shift: f64,
    eps_sing: f64,
}

impl NumericRationalMap {
    pub fn new(
        funcs: Vec<Arc<dyn JetFunction>>,
        numer_shift: f64,
        denom_shift: f64,
    ) -> Result<Self> {
        if funcs.len() < 2 {
            return Err(Error::InvalidArgument("arity must be at least 2".into()));
        }
        Ok(NumericRationalMap {
            funcs,
            numer_shift,
            denom_shift,
            eps_sing: DEFAULT_EPS_SING,
        })
    }
}

impl DifferentiableMap for NumericRationalMap {
    fn arity(&self) -> usize {
        self.funcs.len()
    }

    fn jet(&self, p: &[f64], dirs: (usize, usize)) -> Result<Jet2> {
        let n = self.funcs.len();
        check_index(dirs.0, n)?;
        check_index(dirs.1, n)?;
        if p.len() != n {
            return Err(Error::InvalidArgument("point dimension mismatch".into()));
        }
        let s = p.iter().sum::<f64>() + self.denom_shift;
        if s.abs() < self.eps_sing || !s.is_finite() {
            return Err(Error::SingularPoint {
                denominator: s.abs(),
                threshold: self.eps_sing,
            });
        }
        let g = self.numer_shift
            + self
                .funcs
                .iter()
                .zip(p)
                .map(|(f, &x)| f.jet(x).0)
                .sum::<f64>();
        let (_, di, ddi) = self.funcs[dirs.0 - 1].jet(p[dirs.0 - 1]);
        let (_, dj, _) = self.funcs[dirs.1 - 1].jet(p[dirs.1 - 1]);
        let [value, d_i, d_j, d_ij] = closed_form(s, g, di, dj, ddi, dirs.0 == dirs.1);
        Ok(Jet2 {
            value,
            d_i,
            d_j,
            d_ij,
            dirs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn poly(c: &[i64]) -> UnivariateFunction {
        UnivariateFunction::from_ints(c)
    }

    fn weighted(n: usize) -> RationalQuasigroup {
        RationalQuasigroup::homogeneous((1..=n as i64).map(|i| poly(&[0, i])).collect()).unwrap()
    }

    fn sq_cube_id() -> RationalQuasigroup {
        RationalQuasigroup::homogeneous(vec![poly(&[0, 0, 1]), poly(&[0, 0, 0, 1]), poly(&[0, 1])])
            .unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(weighted(3).eval(&[int(1), int(1), int(1)]).unwrap(), int(2));
        assert_eq!(sq_cube_id().eval(&[1.0, 2.0, 1.0]).unwrap(), 2.5);
        let q =
            RationalQuasigroup::new(vec![poly(&[0, 0, 1]), poly(&[0, 1])], int(0), int(3)).unwrap();
        assert!(matches!(
            q.eval(&[-1.0, -2.0]),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            weighted(3).eval(&[1.0, -1.0, 0.0]),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn first_partial_examples() {
        let p = [int(1), int(2), int(1)];
        assert_eq!(sq_cube_id().first_partial(3, &p).unwrap(), rat(-3, 8));
        let ones = [int(1), int(1), int(1)];
        assert_eq!(weighted(3).first_partial(1, &ones).unwrap(), rat(-1, 3));
    }

    #[test]
    fn equal_slopes_cancel_mixed_partial() {
        // G = 2S, so F_12 = (-4S + 4S)/S^3 (the map itself is degenerate)
        let q =
            RationalQuasigroup::new_unchecked(vec![poly(&[0, 2]), poly(&[0, 2])], int(0), int(0))
                .unwrap();
        for p in [[int(3), int(4)], [rat(1, 7), int(-5)]] {
            assert_eq!(q.mixed_second_partial(1, 2, &p).unwrap(), int(0));
        }
        // with a third nonlinear function the pair still cancels in F_p1 F_2 - F_p2 F_1
        let q =
            RationalQuasigroup::homogeneous(vec![poly(&[0, 2]), poly(&[0, 2]), poly(&[0, 0, 1])])
                .unwrap();
        let p = [int(3), int(4), rat(1, 2)];
        assert_eq!(
            q.mixed_second_partial(3, 1, &p).unwrap(),
            q.mixed_second_partial(3, 2, &p).unwrap()
        );
    }

    #[test]
    fn generic_encoding_matches_closed_form() {
        let m = weighted(3).to_generic_map();
        let j = m.jet_eval(&[1.0, 1.0, 1.0], (1, 3)).unwrap();
        assert!((j.d_i + 1.0 / 3.0).abs() < 1e-15);
        assert!((j.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn isotopy_examples() {
        let q = RationalQuasigroup::new(sq_cube_id().funcs().to_vec(), int(4), int(1)).unwrap();
        let z = q.isotopy_normalize();
        assert_eq!(z.func(3), &poly(&[3, 1]));
        assert!(z.numer_shift().is_zero() && z.denom_shift().is_zero());
        assert_eq!(sq_cube_id().isotopy_normalize(), sq_cube_id());

        let q = RationalQuasigroup::new(
            vec![poly(&[0, 1]), poly(&[0, 2]), poly(&[0, 0, 1])],
            int(-1),
            int(-1),
        )
        .unwrap();
        let z = q.isotopy_normalize();
        assert_eq!(z.func(3), &poly(&[0, 2, 1]));
        for p in [[int(2), int(3), int(5)], [rat(1, 2), int(-3), rat(7, 3)]] {
            assert_eq!(
                q.eval(&p).unwrap(),
                z.eval(&q.isotopy_shift_point(&p)).unwrap()
            );
        }
    }

    #[test]
    fn solvability_examples() {
        let lin =
            RationalQuasigroup::new_unchecked(vec![poly(&[0, 2]); 3], int(0), int(0)).unwrap();
        assert_eq!(
            lin.solvability_check(),
            Err(Error::NotAQuasigroup {
                indices: vec![1, 2, 3]
            })
        );
        assert!(RationalQuasigroup::homogeneous(vec![poly(&[0, 0, 1]), poly(&[0, 1])]).is_ok());
        assert!(weighted(3).solvability_check().is_ok());
        // affine with matching constants: F = 2 + 0/(S + a)
        let aff =
            RationalQuasigroup::new_unchecked(vec![poly(&[1, 2]), poly(&[3, 2])], int(2), int(3))
                .unwrap();
        assert!(aff.solvability_check().is_err());
        let aff =
            RationalQuasigroup::new_unchecked(vec![poly(&[1, 2]), poly(&[3, 2])], int(2), int(4))
                .unwrap();
        assert!(aff.solvability_check().is_ok());
    }

    #[test]
    fn partial_numerator_expansion() {
        // f = (x^2, x): numerator of F_1 is x1^2 + 2 x1 x2 - x2
        let q = RationalQuasigroup::homogeneous(vec![poly(&[0, 0, 1]), poly(&[0, 1])]).unwrap();
        let num = q.partial_numerator_poly(1);
        assert_eq!(num.num_terms(), 3);
        for (x1, x2) in [(2, 3), (-1, 5), (7, 0)] {
            assert_eq!(
                num.eval(&[int(x1), int(x2)]),
                int(x1 * x1 + 2 * x1 * x2 - x2)
            );
        }
    }

    #[test]
    fn permutation_moves_functions() {
        let q = sq_cube_id().permuted(&[3, 1, 2]).unwrap();
        assert_eq!(q.func(3), &poly(&[0, 0, 1]));
        assert_eq!(q.func(1), &poly(&[0, 0, 0, 1]));
        assert!(sq_cube_id().permuted(&[1, 1, 2]).is_err());
    }
}
