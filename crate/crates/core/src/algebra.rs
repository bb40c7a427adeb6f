//! Operator algebra of equivariant maps on undirected graphs.
//!
//! Features live on `Q = N + N(N-1)/2` slots: one per node followed by one per
//! undirected edge in lexicographic order. `L^{m→m'}_i` pools a size-`m`
//! feature down to `i` nodes and broadcasts it over every `i`-subset of the
//! target positions. The nine legal triples span the equivariant maps on this
//! feature space, and products of two operators stay inside the span predicted
//! by the multiplication rule. Claims are checked numerically with SVD-based
//! ranks and least-squares fits.

use std::fmt;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::equimap::{broadcast, pool, Aggregator};
use crate::error::{Error, Result};
use crate::faces::{FaceSpace, Permutation};
use crate::tensors::FaceVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LOperator {
    pub source: usize,
    pub target: usize,
    pub rank: usize,
}

impl LOperator {
    pub fn new(source: usize, target: usize, rank: usize) -> Result<Self> {
        if !(1..=2).contains(&source) || !(1..=2).contains(&target) || rank > source.min(target) {
            return Err(Error::IllegalOperator {
                from: source,
                to: target,
                rank,
            });
        }
        Ok(LOperator {
            source,
            target,
            rank,
        })
    }

    /// The nine operators, ordered by source, target and rank.
    pub fn all() -> Vec<LOperator> {
        let mut out = Vec::new();
        for source in 1..=2 {
            for target in 1..=2 {
                for rank in 0..=source.min(target) {
                    out.push(LOperator {
                        source,
                        target,
                        rank,
                    });
                }
            }
        }
        out
    }

    /// The operators a single layer of the relaxed two-channel model reaches:
    /// all but `L^{2→2}_1`.
    pub fn single_layer_relaxed() -> Vec<LOperator> {
        Self::all()
            .into_iter()
            .filter(|op| !(op.source == 2 && op.target == 2 && op.rank == 1))
            .collect()
    }
}

impl fmt::Display for LOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L^{{{}->{}}}_{}", self.source, self.target, self.rank)
    }
}

fn slot_offset(n_nodes: usize, size: usize) -> usize {
    if size == 1 {
        0
    } else {
        n_nodes
    }
}

/// Number of feature slots for `N` nodes.
pub fn feature_dim(n_nodes: usize) -> usize {
    n_nodes + n_nodes * n_nodes.saturating_sub(1) / 2
}

/// Dense `Q × Q` matrix of an operator, zero outside its target/source block.
pub fn build_l(op: LOperator, n_nodes: usize) -> Result<DMatrix<f64>> {
    let op = LOperator::new(op.source, op.target, op.rank)?;
    if n_nodes < 3 {
        return Err(Error::Range(format!(
            "operator matrices need at least 3 nodes, got {n_nodes}"
        )));
    }
    let q = feature_dim(n_nodes);
    let src = FaceSpace::new(n_nodes, op.source, false);
    let dst = FaceSpace::new(n_nodes, op.target, false);
    let (r0, c0) = (
        slot_offset(n_nodes, op.target),
        slot_offset(n_nodes, op.source),
    );
    let pooled: Vec<usize> = (1..=op.source - op.rank).collect();
    let placements: Vec<Vec<usize>> = (1..=op.target).combinations(op.rank).collect();
    let mut matrix = DMatrix::zeros(q, q);
    for col in 0..src.count() {
        let mut unit = vec![0.0; src.count()];
        unit[col] = 1.0;
        let x = FaceVector::from_values(src, 1, unit)?.to_directed();
        let reduced = pool(&x, &pooled, Aggregator::Sum)?;
        let mut acc = vec![0.0; FaceSpace::new(n_nodes, op.target, true).count()];
        for b in &placements {
            let y = broadcast(&reduced, b, op.target)?;
            acc.iter_mut().zip(y.values()).for_each(|(a, v)| *a += v);
        }
        let directed = FaceVector::from_values(FaceSpace::new(n_nodes, op.target, true), 1, acc)?;
        for (row, t) in dst.tuples().iter().enumerate() {
            matrix[(r0 + row, c0 + col)] = directed.value_at(t, 0)?;
        }
    }
    Ok(matrix)
}

fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Rank of a set of matrices, viewed as vectors, with singular values below
/// `1e-9 ×` the largest treated as zero.
pub fn matrix_span_rank(matrices: &[DMatrix<f64>]) -> usize {
    let Some(first) = matrices.first() else {
        return 0;
    };
    let rows = first.len();
    let stacked = DMatrix::from_fn(rows, matrices.len(), |r, c| matrices[c].as_slice()[r]);
    let sv = stacked.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * max).count()
}

pub fn span_dimension(ops: &[LOperator], n_nodes: usize) -> Result<usize> {
    let mats = ops
        .iter()
        .map(|&op| build_l(op, n_nodes))
        .collect::<Result<Vec<_>>>()?;
    Ok(matrix_span_rank(&mats))
}

/// Least-squares coefficients of `target` in the span of `basis`, and the
/// Frobenius norm of the residual.
pub fn fit_in_span(target: &DMatrix<f64>, basis: &[DMatrix<f64>]) -> (Vec<f64>, f64) {
    let b = vectorize(target);
    if basis.is_empty() {
        return (Vec::new(), b.norm());
    }
    let a = DMatrix::from_fn(b.len(), basis.len(), |r, c| basis[c].as_slice()[r]);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, 1e-12)
        .expect("both singular bases were requested");
    let residual = (&a * &coef - &b).norm();
    (coef.iter().copied().collect(), residual)
}

/// The operators the multiplication rule predicts for `second ∘ first`:
/// ranks `k` with `max(0, i + j - m') ≤ k ≤ min(i, j)`.
pub fn predicted_basis(first: LOperator, second: LOperator) -> Result<Vec<LOperator>> {
    if first.target != second.source {
        return Err(Error::ShapeMismatch(format!(
            "{second} cannot follow {first}: sizes {} and {} differ",
            first.target, second.source
        )));
    }
    let (i, j, mid) = (first.rank, second.rank, first.target);
    let lo = (i + j).saturating_sub(mid);
    let hi = i.min(j);
    (lo..=hi)
        .map(|k| LOperator::new(first.source, second.target, k))
        .collect()
}

/// Outcome of checking one product against the multiplication rule.
#[derive(Debug, Clone)]
pub struct CompositionCheck {
    pub first: LOperator,
    pub second: LOperator,
    pub product: DMatrix<f64>,
    pub basis: Vec<LOperator>,
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

/// Fits `L(second) · L(first)` (first applied first) against the predicted basis.
pub fn compose_check(
    first: LOperator,
    second: LOperator,
    n_nodes: usize,
) -> Result<CompositionCheck> {
    let basis = predicted_basis(first, second)?;
    compose_check_with(first, second, &basis, n_nodes)
}

/// As [`compose_check`] with a caller-chosen basis.
pub fn compose_check_with(
    first: LOperator,
    second: LOperator,
    basis: &[LOperator],
    n_nodes: usize,
) -> Result<CompositionCheck> {
    if first.target != second.source {
        return Err(Error::ShapeMismatch(format!(
            "{second} cannot follow {first}"
        )));
    }
    let product = build_l(second, n_nodes)? * build_l(first, n_nodes)?;
    let mats = basis
        .iter()
        .map(|&op| build_l(op, n_nodes))
        .collect::<Result<Vec<_>>>()?;
    let (coefficients, residual) = fit_in_span(&product, &mats);
    Ok(CompositionCheck {
        first,
        second,
        product,
        basis: basis.to_vec(),
        coefficients,
        residual,
    })
}

/// Every composable `(first, second)` pair among the nine operators.
pub fn legal_compositions() -> Vec<(LOperator, LOperator)> {
    let all = LOperator::all();
    all.iter()
        .cartesian_product(&all)
        .filter(|(a, b)| a.target == b.source)
        .map(|(a, b)| (*a, *b))
        .collect()
}

/// Span dimensions of the nine operators, of one relaxed layer, and of two
/// stacked relaxed layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TwoLayerSpan {
    pub full: usize,
    pub single: usize,
    pub stacked: usize,
    /// Span dimension of the closure predicted by the multiplication rule.
    pub predicted: usize,
}

pub fn two_layer_span_check(n_nodes: usize) -> Result<TwoLayerSpan> {
    let full = span_dimension(&LOperator::all(), n_nodes)?;
    let single_ops = LOperator::single_layer_relaxed();
    let single_mats = single_ops
        .iter()
        .map(|&op| build_l(op, n_nodes))
        .collect::<Result<Vec<_>>>()?;
    let single = matrix_span_rank(&single_mats);

    let mut stacked_mats = single_mats.clone();
    let mut predicted_ops = single_ops.clone();
    for (a, ma) in single_ops.iter().zip(&single_mats) {
        for (b, mb) in single_ops.iter().zip(&single_mats) {
            if a.target == b.source {
                stacked_mats.push(mb * ma);
                predicted_ops.extend(predicted_basis(*a, *b)?);
            }
        }
    }
    let stacked = matrix_span_rank(&stacked_mats);
    predicted_ops.sort_unstable();
    predicted_ops.dedup();
    let predicted = span_dimension(&predicted_ops, n_nodes)?;
    Ok(TwoLayerSpan {
        full,
        single,
        stacked,
        predicted,
    })
}

/// Permutation matrix induced by a node permutation on the `Q` feature slots.
pub fn slot_permutation(perm: &Permutation) -> DMatrix<f64> {
    let n = perm.n_nodes();
    let q = feature_dim(n);
    let edges = FaceSpace::new(n, 2, false);
    let mut p = DMatrix::zeros(q, q);
    for v in 1..=n as u32 {
        p[(perm.apply(v) as usize - 1, v as usize - 1)] = 1.0;
    }
    for (e, t) in edges.tuples().iter().enumerate() {
        let img = edges
            .index_of(&perm.apply_tuple(t))
            .expect("permuted edges stay valid");
        p[(n + img, n + e)] = 1.0;
    }
    p
}

/// Comma-separated rows, one line per matrix row.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        out.push_str(&m.row(r).iter().map(|v| format!("{v}")).join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn op(s: usize, t: usize, r: usize) -> LOperator {
        LOperator::new(s, t, r).unwrap()
    }

    #[test]
    fn exactly_nine_legal_operators() {
        assert_eq!(LOperator::all().len(), 9);
        assert!(LOperator::new(1, 1, 2).is_err());
        assert!(LOperator::new(3, 1, 0).is_err());
        assert_eq!(LOperator::single_layer_relaxed().len(), 8);
    }

    #[test]
    fn node_blocks() {
        let n = 4;
        let id = build_l(op(1, 1, 1), n).unwrap();
        let ones = build_l(op(1, 1, 0), n).unwrap();
        for r in 0..feature_dim(n) {
            for c in 0..feature_dim(n) {
                let node = r < n && c < n;
                assert_eq!(id[(r, c)], if node && r == c { 1.0 } else { 0.0 });
                assert_eq!(ones[(r, c)], if node { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn edges_to_incident_nodes() {
        let n = 3;
        let m = build_l(op(2, 1, 1), n).unwrap();
        // edges {1,2},{1,3},{2,3} at columns 3,4,5
        let expect = [[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        for v in 0..3 {
            for e in 0..3 {
                assert_eq!(m[(v, 3 + e)], expect[v][e]);
            }
        }
        let back = build_l(op(1, 2, 1), n).unwrap();
        assert_eq!(back.transpose(), m);
        let e_id = build_l(op(2, 2, 2), n).unwrap();
        assert!((0..3).all(|e| e_id[(3 + e, 3 + e)] == 1.0));
    }

    #[test]
    fn documented_compositions() {
        let c = compose_check(op(2, 1, 1), op(1, 2, 1), 5).unwrap();
        assert_eq!(c.basis, vec![op(2, 2, 1)]);
        assert!(c.residual < 1e-9);
        assert!((c.coefficients[0] - 1.0).abs() < 1e-9);

        let c = compose_check(op(1, 1, 0), op(1, 1, 0), 5).unwrap();
        assert_eq!(c.basis, vec![op(1, 1, 0)]);
        assert!(c.residual < 1e-9);
        assert!((c.coefficients[0] - 5.0).abs() < 1e-9);

        for any in LOperator::all() {
            let ident = LOperator::new(any.target, any.target, any.target).unwrap();
            let c = compose_check(any, ident, 5).unwrap();
            assert_eq!(c.basis, vec![any]);
            assert!(c.residual < 1e-9);
        }
    }

    #[test]
    fn every_composition_follows_the_rule() {
        for n in [5, 6] {
            for (a, b) in legal_compositions() {
                let c = compose_check(a, b, n).unwrap();
                assert!(c.residual < 1e-9, "{b} after {a} at N={n}: {}", c.residual);
            }
        }
    }

    #[test]
    fn extreme_ranks_are_needed() {
        let n = 6;
        let mut low_needed = false;
        let mut high_needed = false;
        for (a, b) in legal_compositions() {
            let c = compose_check(a, b, n).unwrap();
            if c.basis.len() < 2 {
                continue;
            }
            for (pos, flag) in [(0, &mut low_needed), (c.basis.len() - 1, &mut high_needed)] {
                if c.coefficients[pos].abs() < 1e-6 {
                    continue;
                }
                let mut reduced = c.basis.clone();
                reduced.remove(pos);
                let r = compose_check_with(a, b, &reduced, n).unwrap();
                if r.residual > 1e-3 {
                    *flag = true;
                }
            }
        }
        assert!(low_needed && high_needed);
    }

    #[test]
    fn span_dimensions() {
        assert_eq!(span_dimension(&LOperator::all(), 5).unwrap(), 9);
        assert_eq!(
            span_dimension(&LOperator::single_layer_relaxed(), 5).unwrap(),
            8
        );
        assert_eq!(span_dimension(&[], 5).unwrap(), 0);
        let all = LOperator::all();
        for k in 0..all.len() {
            let small = span_dimension(&all[..k], 5).unwrap();
            let big = span_dimension(&all[..=k], 5).unwrap();
            assert!(small <= big);
        }
    }

    #[test]
    fn two_layers_recover_the_full_span() {
        for n in [5, 6] {
            let s = two_layer_span_check(n).unwrap();
            assert_eq!((s.full, s.single, s.stacked), (9, 8, 9));
            assert_eq!(s.predicted, s.stacked);
        }
    }

    #[test]
    fn operators_commute_with_node_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let perm = Permutation::random(5, &mut rng);
            let p = slot_permutation(&perm);
            for o in LOperator::all() {
                let l = build_l(o, 5).unwrap();
                assert_eq!(&p * &l * p.transpose(), l, "{o}");
            }
        }
    }

    #[test]
    fn csv_export() {
        let m = build_l(op(1, 1, 1), 3).unwrap();
        let csv = matrix_to_csv(&m);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("1,0,0,0,0,0\n"));
    }
}
