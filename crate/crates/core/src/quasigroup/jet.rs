//! Second-order jets in two directions.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

/// Value, the first partials along directions `i` and `j`, and the mixed
/// second partial `∂²/∂x_i∂x_j`. Directions are 1-based variable indices and
/// may coincide, in which case `d_ij` is the pure second partial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jet2 {
    pub value: f64,
    pub d_i: f64,
    pub d_j: f64,
    pub d_ij: f64,
    pub dirs: (usize, usize),
}

impl Jet2 {
    pub fn constant(value: f64, dirs: (usize, usize)) -> Self {
        Jet2 {
            value,
            d_i: 0.0,
            d_j: 0.0,
            d_ij: 0.0,
            dirs,
        }
    }

    /// The coordinate `x_var` seeded for the jet directions.
    pub fn variable(value: f64, var: usize, dirs: (usize, usize)) -> Self {
        Jet2 {
            value,
            d_i: if var == dirs.0 { 1.0 } else { 0.0 },
            d_j: if var == dirs.1 { 1.0 } else { 0.0 },
            d_ij: 0.0,
            dirs,
        }
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(self, g: f64, dg: f64, ddg: f64) -> Self {
        Jet2 {
            value: g,
            d_i: dg * self.d_i,
            d_j: dg * self.d_j,
            d_ij: ddg * self.d_i * self.d_j + dg * self.d_ij,
            dirs: self.dirs,
        }
    }

    /// `1 / self`; the caller guards against a vanishing value.
    pub fn recip(self) -> Self {
        let v = self.value;
        let r = 1.0 / v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Jet2::constant(1.0, self.dirs),
            1 => self,
            _ => {
                let v = self.value;
                let kf = f64::from(k);
                self.chain(
                    v.powi(k),
                    kf * v.powi(k - 1),
                    kf * (kf - 1.0) * v.powi(k - 2),
                )
            }
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;

    fn add(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.dirs, rhs.dirs);
        Jet2 {
            value: self.value + rhs.value,
            d_i: self.d_i + rhs.d_i,
            d_j: self.d_j + rhs.d_j,
            d_ij: self.d_ij + rhs.d_ij,
            dirs: self.dirs,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;

    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;

    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            d_i: -self.d_i,
            d_j: -self.d_j,
            d_ij: -self.d_ij,
            dirs: self.dirs,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;

    fn mul(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.dirs, rhs.dirs);
        Jet2 {
            value: self.value * rhs.value,
            d_i: self.d_i * rhs.value + self.value * rhs.d_i,
            d_j: self.d_j * rhs.value + self.value * rhs.d_j,
            d_ij: self.d_ij * rhs.value
                + self.d_i * rhs.d_j
                + self.d_j * rhs.d_i
                + self.value * rhs.d_ij,
            dirs: self.dirs,
        }
    }
}
