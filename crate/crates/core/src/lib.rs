//! Local differentiable n-quasigroups of the rational family
//! `F = (f_1(x_1) + ... + f_n(x_n) + A) / (x_1 + ... + x_n + a)`.
//!
//! The crate decides reducibility two ways: exactly, by grouping the
//! component functions by slope, and numerically, by sampling the
//! second-order reducibility conditions `F_pa F_b = F_pb F_a`. It also
//! exports the level hypersurfaces of the associated (n+1)-web.

pub mod cli;
pub mod error;
pub mod funcs;
pub mod gallery;
pub mod multipoly;
pub mod quasigroup;
pub mod reducibility;
pub mod scalar;
pub mod verify;
pub mod web;

pub use error::{Error, Result};
pub use funcs::UnivariateFunction;
pub use quasigroup::{DifferentiableMap, GenericMap, Jet2, RationalQuasigroup};
