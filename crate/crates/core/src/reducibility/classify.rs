//! Exact classification of the rational family by slope grouping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::funcs::UnivariateFunction;
use crate::multipoly::MultiPoly;
use crate::quasigroup::RationalQuasigroup;
use crate::scalar::{format_rational, Scalar};

/// Indices whose component functions are affine with one common slope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeBlock {
    pub indices: Vec<usize>,
    pub slope: BigRational,
    /// Constant terms, aligned with `indices`.
    pub intercepts: Vec<BigRational>,
}

impl SlopeBlock {
    fn to_json(&self) -> Value {
        json!({
            "indices": self.indices,
            "slope": format_rational(&self.slope),
            "intercepts": self.intercepts.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Irreducible,
    Reducible {
        blocks: Vec<SlopeBlock>,
    },
    /// One slope block covers every index: `F` depends on `x_1 + ... + x_n` only.
    CompletelyReducible {
        block: SlopeBlock,
    },
    NotAQuasigroup {
        indices: Vec<usize>,
    },
}

impl Classification {
    pub fn verdict(&self) -> &'static str {
        match self {
            Classification::Irreducible => "Irreducible",
            Classification::Reducible { .. } => "Reducible",
            Classification::CompletelyReducible { .. } => "CompletelyReducible",
            Classification::NotAQuasigroup { .. } => "NotAQuasigroup",
        }
    }

    pub fn blocks(&self) -> &[SlopeBlock] {
        match self {
            Classification::Reducible { blocks } => blocks,
            Classification::CompletelyReducible { block } => std::slice::from_ref(block),
            _ => &[],
        }
    }

    pub fn block_index_sets(&self) -> Vec<Vec<usize>> {
        self.blocks().iter().map(|b| b.indices.clone()).collect()
    }

    /// Pairs `(i, j)`, `i < j`, lying in a common block.
    pub fn same_block_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for b in self.blocks() {
            for (x, &i) in b.indices.iter().enumerate() {
                for &j in &b.indices[x + 1..] {
                    out.insert((i, j));
                }
            }
        }
        out
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.blocks()
            .iter()
            .any(|b| b.indices.contains(&i) && b.indices.contains(&j))
    }

    /// `{"verdict": ..., "blocks": [{"indices": [...], "slope": "p/q", ...}]}`
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "verdict": self.verdict() });
        let blocks = self.blocks();
        if !blocks.is_empty() {
            v["blocks"] = Value::Array(blocks.iter().map(SlopeBlock::to_json).collect());
        }
        if let Classification::NotAQuasigroup { indices } = self {
            v["degenerate_indices"] = json!(indices);
        }
        v
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Decides reducibility of an instance exactly.
///
/// Indices whose functions have degree at most one are grouped by slope;
/// every group of two or more is a reducible block. Intercepts do not
/// matter for the residual and are only recorded.
pub fn classify(q: &RationalQuasigroup) -> Classification {
    if let Err(Error::NotAQuasigroup { indices }) = q.solvability_check() {
        return Classification::NotAQuasigroup { indices };
    }
    let mut groups: BTreeMap<BigRational, Vec<(usize, BigRational)>> = BTreeMap::new();
    for (k, f) in q.funcs().iter().enumerate() {
        if let Some((slope, intercept)) = f.linear_slope() {
            groups.entry(slope).or_default().push((k + 1, intercept));
        }
    }
    let mut blocks: Vec<SlopeBlock> = groups
        .into_iter()
        .filter(|(_, members)| members.len() >= 2)
        .map(|(slope, members)| SlopeBlock {
            indices: members.iter().map(|(i, _)| *i).collect(),
            intercepts: members.into_iter().map(|(_, d)| d).collect(),
            slope,
        })
        .collect();
    blocks.sort_by_key(|b| b.indices[0]);
    match blocks.len() {
        0 => Classification::Irreducible,
        1 if blocks[0].indices.len() == q.arity() => Classification::CompletelyReducible {
            block: blocks.remove(0),
        },
        _ => Classification::Reducible { blocks },
    }
}

/// Pairs whose normal-vector coordinates `f_i' - alpha` and `f_j' - alpha`
/// agree identically, decided by expanding `f_i'(x_i) - f_j'(x_j)`.
pub fn identical_derivative_pairs(q: &RationalQuasigroup) -> BTreeSet<(usize, usize)> {
    let n = q.arity();
    let derivs: Vec<MultiPoly> = q
        .funcs()
        .iter()
        .enumerate()
        .map(|(k, f)| MultiPoly::univariate(n, k, &f.derivative()))
        .collect();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if (&derivs[i] - &derivs[j]).is_zero() {
                out.insert((i + 1, j + 1));
            }
        }
    }
    out
}

/// `F = g(h, x_rest)` with `h = sum of x_i over the block` and
/// `g = (c h + sum f_rest + D + A) / (h + sum x_rest + a)`, where `D` sums
/// the block intercepts.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedForm {
    pub block: Vec<usize>,
    pub slope: BigRational,
    pub intercept_sum: BigRational,
    /// Remaining `(index, f_index)` pairs in index order.
    pub rest: Vec<(usize, UnivariateFunction)>,
    pub numer_shift: BigRational,
    pub denom_shift: BigRational,
}

impl ReducedForm {
    /// The inner operation `h`.
    pub fn inner<T: Scalar>(&self, p: &[T]) -> T {
        self.block
            .iter()
            .fold(T::zero(), |acc, &i| acc + p[i - 1].clone())
    }

    /// The outer operation `g(h, x_rest)`; `rest` is aligned with [`Self::rest`].
    pub fn outer<T: Scalar>(&self, h: T, rest: &[T]) -> Result<T> {
        let c = T::from_rational(&self.slope);
        let mut num = c * h.clone()
            + T::from_rational(&self.intercept_sum)
            + T::from_rational(&self.numer_shift);
        let mut den = h + T::from_rational(&self.denom_shift);
        for ((_, f), x) in self.rest.iter().zip(rest) {
            num = num + f.eval(x);
            den = den + x.clone();
        }
        if den.magnitude() < crate::quasigroup::DEFAULT_EPS_SING {
            return Err(Error::SingularPoint {
                denominator: den.magnitude(),
                threshold: crate::quasigroup::DEFAULT_EPS_SING,
            });
        }
        Ok(num / den)
    }

    /// `g(h(x_block), x_rest)`.
    pub fn eval<T: Scalar>(&self, p: &[T]) -> Result<T> {
        let rest: Vec<T> = self.rest.iter().map(|(i, _)| p[i - 1].clone()).collect();
        self.outer(self.inner(p), &rest)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "inner": format!("h = {}", self.block.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join(" + ")),
            "block": self.block,
            "slope": format_rational(&self.slope),
            "intercept_sum": format_rational(&self.intercept_sum),
            "rest": self.rest.iter().map(|(i, f)| json!({"index": i, "f": f})).collect::<Vec<_>>(),
            "A": format_rational(&self.numer_shift),
            "a": format_rational(&self.denom_shift),
        })
    }
}

/// Factorization through `h = sum x_i` for a block of equal-slope indices.
pub fn emit_reduction(q: &RationalQuasigroup, block: &[usize]) -> Result<ReducedForm> {
    let not_block = || Error::NotReducibleBlock {
        indices: block.to_vec(),
    };
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2
        || sorted.len() != block.len()
        || sorted.iter().any(|&i| i == 0 || i > q.arity())
    {
        return Err(not_block());
    }
    let class = classify(q);
    if matches!(class, Classification::NotAQuasigroup { .. }) {
        return Err(not_block());
    }
    let owner = class
        .blocks()
        .iter()
        .find(|b| sorted.iter().all(|i| b.indices.contains(i)))
        .ok_or_else(not_block)?;
    let intercept_sum = sorted.iter().fold(BigRational::zero(), |acc, &i| {
        let k = owner
            .indices
            .iter()
            .position(|&j| j == i)
            .unwrap_or_default();
        acc + &owner.intercepts[k]
    });
    let rest = (1..=q.arity())
        .filter(|i| !sorted.contains(i))
        .map(|i| (i, q.func(i).clone()))
        .collect();
    Ok(ReducedForm {
        block: sorted,
        slope: owner.slope.clone(),
        intercept_sum,
        rest,
        numer_shift: q.numer_shift().clone(),
        denom_shift: q.denom_shift().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn poly(c: &[i64]) -> UnivariateFunction {
        UnivariateFunction::from_ints(c)
    }

    fn q(funcs: Vec<UnivariateFunction>, big_a: i64, small_a: i64) -> RationalQuasigroup {
        RationalQuasigroup::new_unchecked(funcs, int(big_a), int(small_a)).unwrap()
    }

    #[test]
    fn weighted_is_irreducible() {
        for n in 3..=7 {
            let funcs = (1..=n).map(|i| poly(&[0, i])).collect();
            assert_eq!(classify(&q(funcs, 0, 0)), Classification::Irreducible);
        }
    }

    #[test]
    fn planted_equal_slopes_form_a_block() {
        let c = classify(&q(
            vec![
                poly(&[0, 3]),
                poly(&[0, 3]),
                poly(&[0, 0, 1]),
                poly(&[0, 0, 0, 1]),
            ],
            0,
            0,
        ));
        assert_eq!(c.verdict(), "Reducible");
        assert_eq!(c.block_index_sets(), vec![vec![1, 2]]);
        assert_eq!(c.blocks()[0].slope, int(3));
    }

    #[test]
    fn squares_with_pencil_constants_are_irreducible() {
        for n in [2, 3, 5] {
            assert_eq!(
                classify(&q(vec![poly(&[0, 0, 1]); n], -1, -1)),
                Classification::Irreducible
            );
        }
    }

    #[test]
    fn all_equal_linear_is_degenerate() {
        let c = classify(&q(vec![poly(&[0, 2]); 4], 0, 0));
        assert_eq!(
            c,
            Classification::NotAQuasigroup {
                indices: vec![1, 2, 3, 4]
            }
        );
        assert_eq!(c.to_json()["verdict"], "NotAQuasigroup");
    }

    #[test]
    fn affine_intercepts_are_recorded() {
        let c = classify(&q(
            vec![poly(&[1, 2]), poly(&[5, 2]), poly(&[0, 0, 0, 1])],
            0,
            0,
        ));
        assert_eq!(c.blocks()[0].slope, int(2));
        assert_eq!(c.blocks()[0].intercepts, vec![int(1), int(5)]);
    }

    #[test]
    fn all_equal_affine_with_offset_is_completely_reducible() {
        let c = classify(&q(vec![poly(&[1, 2]); 3], 0, 0));
        assert_eq!(c.verdict(), "CompletelyReducible");
        assert_eq!(c.same_block_pairs().len(), 3);
    }

    #[test]
    fn multiple_blocks_sorted_by_smallest_index() {
        let funcs = vec![
            poly(&[0, 5]),
            poly(&[0, 1]),
            poly(&[0, 1]),
            poly(&[0, 5]),
            poly(&[0, 0, 1]),
        ];
        let c = classify(&q(funcs, 0, 0));
        assert_eq!(c.block_index_sets(), vec![vec![1, 4], vec![2, 3]]);
        let json = c.to_json();
        assert_eq!(json["blocks"][0]["slope"], "5");
    }

    #[test]
    fn json_shape() {
        let c = classify(&q(vec![poly(&[0, 1]), poly(&[0, 2]), poly(&[0, 3])], 0, 0));
        assert_eq!(c.to_json().to_string(), r#"{"verdict":"Irreducible"}"#);
    }

    #[test]
    fn normal_pairs_need_identity() {
        let squares = q(vec![poly(&[0, 0, 1]); 3], -1, -1);
        assert!(identical_derivative_pairs(&squares).is_empty());
        let aff = q(
            vec![poly(&[0, 2]), poly(&[1, 2]), poly(&[0, 0, 0, 1])],
            0,
            0,
        );
        assert_eq!(identical_derivative_pairs(&aff), BTreeSet::from([(1, 2)]));
    }

    #[test]
    fn reduced_form_reproduces_f() {
        let quasi = q(
            vec![
                poly(&[1, 3]),
                poly(&[0, 3]),
                poly(&[-2, 3]),
                poly(&[0, 0, 1]),
                poly(&[4, 0, 0, 1]),
            ],
            2,
            1,
        );
        for block in [vec![1, 2], vec![1, 2, 3], vec![3, 1]] {
            let red = emit_reduction(&quasi, &block).unwrap();
            for p in [
                [int(1), int(2), int(3), int(4), int(5)],
                [rat(1, 2), int(-1), rat(7, 3), int(0), int(2)],
            ] {
                assert_eq!(red.eval(&p).unwrap(), quasi.eval(&p).unwrap());
            }
        }
        assert!(matches!(
            emit_reduction(&quasi, &[1, 4]),
            Err(Error::NotReducibleBlock { .. })
        ));
        assert!(emit_reduction(&quasi, &[1]).is_err());
        assert!(emit_reduction(&quasi, &[1, 1]).is_err());
    }
}
