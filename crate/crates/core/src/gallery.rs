//! Built-in example instances, parametric in the arity.

use crate::funcs::UnivariateFunction;
use crate::quasigroup::RationalQuasigroup;
use crate::scalar::int;

/// `(x_1 + 2 x_2 + ... + n x_n) / (x_1 + ... + x_n)`: distinct slopes,
/// irreducible for every `n >= 3`.
pub fn weighted(n: usize) -> RationalQuasigroup {
    let funcs = (1..=n as i64)
        .map(|i| UnivariateFunction::from_ints(&[0, i]))
        .collect();
    RationalQuasigroup::homogeneous(funcs).expect("distinct slopes are solvable")
}

/// `(x_1^2 + ... + x_n^2 - 1) / (x_1 + ... + x_n - 1)`: levels are
/// hyperspheres through the unit points.
pub fn spheres(n: usize) -> RationalQuasigroup {
    RationalQuasigroup::new(vec![UnivariateFunction::monomial(2); n], int(-1), int(-1))
        .expect("squares are solvable")
}

/// The planar case of [`spheres`]: circles through `(1, 0)` and `(0, 1)`.
pub fn circles() -> RationalQuasigroup {
    spheres(2)
}

/// Looks up `weighted`, `spheres` or `circles`.
pub fn by_name(name: &str, n: usize) -> Option<RationalQuasigroup> {
    match name {
        "weighted" if n >= 2 => Some(weighted(n)),
        "spheres" if n >= 2 => Some(spheres(n)),
        "circles" => Some(circles()),
        _ => None,
    }
}
