#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use quasiweb::reducibility::{
    generate_instance, substream, GeneratedInstance, GeneratorConfig, SampleBox,
};
use quasiweb::RationalQuasigroup;
use rand::Rng;

pub fn instance(seed: u64) -> GeneratedInstance {
    let mut rng = substream(seed, 7);
    generate_instance(&mut rng, &GeneratorConfig::default())
}

/// Rational point inside the default box with small denominators, regular
/// with respect to `q`.
pub fn exact_point<R: Rng>(q: &RationalQuasigroup, rng: &mut R) -> Vec<BigRational> {
    let domain = SampleBox::default_for(q);
    loop {
        let p: Vec<BigRational> = domain
            .bounds()
            .iter()
            .map(|&(lo, hi)| {
                let d = rng.random_range(1..=7i64);
                let n = (rng.random_range(lo..hi) * d as f64).round() as i64;
                BigRational::new(BigInt::from(n), BigInt::from(d))
            })
            .collect();
        if q.is_regular(&p) {
            return p;
        }
    }
}

pub fn to_f64(p: &[BigRational]) -> Vec<f64> {
    p.iter().map(quasiweb::scalar::rational_to_f64).collect()
}

/// Central finite differences written independently of the library's
/// derivative code: value-only evaluations of `f`. Indices are 1-based.
pub fn fd_first(f: &dyn Fn(&[f64]) -> f64, p: &[f64], i: usize) -> f64 {
    let i = i - 1;
    let h = 1e-4 * p[i].abs().max(1.0);
    let mut a = p.to_vec();
    let mut b = p.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

pub fn fd_mixed(f: &dyn Fn(&[f64]) -> f64, p: &[f64], i: usize, j: usize) -> f64 {
    let (i, j) = (i - 1, j - 1);
    let hi = 1e-4 * p[i].abs().max(1.0);
    if i == j {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[i] += hi;
        b[i] -= hi;
        return (f(&a) - 2.0 * f(p) + f(&b)) / (hi * hi);
    }
    let hj = 1e-4 * p[j].abs().max(1.0);
    let at = |si: f64, sj: f64| {
        let mut q = p.to_vec();
        q[i] += si * hi;
        q[j] += sj * hj;
        f(&q)
    };
    (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * hi * hj)
}

/// `|x - y| / max(|x|, |y|, scale)`.
pub fn rel(x: f64, y: f64, scale: f64) -> f64 {
    let d = (x - y).abs();
    if d == 0.0 {
        0.0
    } else {
        d / x.abs().max(y.abs()).max(scale)
    }
}

/// Rank of a point cloud after centering, by Gaussian elimination with a
/// relative pivot threshold.
pub fn centered_rank(points: &[Vec<f64>], rel_tol: f64) -> usize {
    let n = points[0].len();
    let m = points.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / m)
        .collect();
    let mut rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, c)| x - c).collect())
        .collect();
    let scale = rows.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut rank = 0;
    for col in 0..n {
        let Some((piv, _)) = rows
            .iter()
            .enumerate()
            .skip(rank)
            .map(|(r, row)| (r, row[col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if rows[piv][col].abs() <= rel_tol * scale {
            continue;
        }
        rows.swap(rank, piv);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank {
                let factor = row[col] / pivot[col];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= factor * y;
                }
            }
        }
        rank += 1;
    }
    rank
}
