//! Brute-force ground truth for equivariant maps between face-vectors.
//!
//! The weight tensor of a map from size-`M` to size-`M'` face-vectors has one
//! entry per `(output face, input face)` pair. Node permutations act on both
//! faces at once, and two pairs share an orbit exactly when their node tuples
//! show the same equality pattern. Since the nodes inside one face are
//! distinct, that pattern is a partial matching between input and output
//! positions. Everything here runs on integers so comparisons are exact.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::equimap::{
    apply_map, enumerate_terms, tau, EquivariantMap, OrbitSignature, PoolBroadcastTerm,
};
use crate::error::{Error, Result};
use crate::faces::{FaceSpace, NodeId, Permutation};
use crate::tensors::FaceVector;

/// Bell number via the Bell triangle. Overflow of `u64` is a range error.
pub fn bell(n: usize) -> Result<u64> {
    let overflow = || Error::Range(format!("Bell({n}) does not fit in 64 bits"));
    let mut row: Vec<u64> = vec![1];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("rows are non-empty"));
        for &v in &row {
            let prev = *next.last().expect("seeded above");
            next.push(prev.checked_add(v).ok_or_else(overflow)?);
        }
        row = next;
    }
    Ok(row[0])
}

/// Stirling number of the second kind via `S(n,k) = k S(n-1,k) + S(n-1,k-1)`.
pub fn stirling(n: usize, k: usize) -> Result<u64> {
    let overflow = || Error::Range(format!("S({n},{k}) does not fit in 64 bits"));
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = (j as u64)
                .checked_mul(row[j])
                .and_then(|a| a.checked_add(row[j - 1]))
                .ok_or_else(overflow)?;
        }
        row[0] = 0;
    }
    Ok(row[k])
}

/// Cross-position equalities of one weight orbit: 1-based `(input, output)`
/// pairs, ascending in the input position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrbitPattern {
    pub input_size: usize,
    pub output_size: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl OrbitPattern {
    pub fn new(input_size: usize, output_size: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut pairs = pairs;
        pairs.sort_unstable();
        for (k, &(j, b)) in pairs.iter().enumerate() {
            if j == 0 || j > input_size || b == 0 || b > output_size {
                return Err(Error::InvalidTerm(format!(
                    "pair ({j},{b}) outside 1..={input_size} x 1..={output_size}"
                )));
            }
            if pairs[..k].iter().any(|&(j2, b2)| j2 == j || b2 == b) {
                return Err(Error::InvalidTerm(format!(
                    "pattern {pairs:?} is not a partial matching"
                )));
            }
        }
        Ok(OrbitPattern {
            input_size,
            output_size,
            pairs,
        })
    }

    /// Equality pattern of one `(output tuple, input tuple)` pair.
    fn of_pair(input: &[NodeId], output: &[NodeId]) -> Self {
        let pairs = input
            .iter()
            .enumerate()
            .filter_map(|(j, v)| output.iter().position(|w| w == v).map(|b| (j + 1, b + 1)))
            .collect();
        OrbitPattern {
            input_size: input.len(),
            output_size: output.len(),
            pairs,
        }
    }
}

/// Pool the unmatched inputs, place each matched input at its partner.
pub fn orbit_to_term(pattern: &OrbitPattern) -> Result<PoolBroadcastTerm> {
    let matched: Vec<usize> = pattern.pairs.iter().map(|p| p.0).collect();
    let pooled = (1..=pattern.input_size)
        .filter(|j| !matched.contains(j))
        .collect();
    let placement = pattern.pairs.iter().map(|p| p.1).collect();
    PoolBroadcastTerm::new(pattern.input_size, pattern.output_size, pooled, placement)
}

pub fn term_to_pattern(term: &PoolBroadcastTerm) -> OrbitPattern {
    OrbitPattern {
        input_size: term.input_size(),
        output_size: term.output_size(),
        pairs: term.matched_pairs(),
    }
}

/// One orbit of weight-tensor entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub pattern: OrbitPattern,
    /// `(output face index, input face index)` pairs, ascending.
    pub members: Vec<(usize, usize)>,
}

/// Orbits of the `(M → M')` weight tensor at `N` nodes, in the order of
/// [`enumerate_terms`]. Needs `N ≥ M + M'` so every pattern occurs.
pub fn enumerate_orbits_bruteforce(
    m_in: usize,
    m_out: usize,
    n_nodes: usize,
) -> Result<Vec<Orbit>> {
    if n_nodes < m_in + m_out {
        return Err(Error::UnderResolvedOrbits {
            m_in,
            m_out,
            n_nodes,
            needed: m_in + m_out,
        });
    }
    Ok(enumerate_orbits_unchecked(m_in, m_out, n_nodes))
}

/// Same grouping without the node-count guard. Patterns needing more than `N`
/// distinct nodes are simply absent.
pub fn enumerate_orbits_unchecked(m_in: usize, m_out: usize, n_nodes: usize) -> Vec<Orbit> {
    let ins = FaceSpace::new(n_nodes, m_in, true).tuples();
    let outs = FaceSpace::new(n_nodes, m_out, true).tuples();
    let mut groups: HashMap<OrbitPattern, Vec<(usize, usize)>> = HashMap::new();
    for (o, out) in outs.iter().enumerate() {
        for (i, inp) in ins.iter().enumerate() {
            groups
                .entry(OrbitPattern::of_pair(inp, out))
                .or_default()
                .push((o, i));
        }
    }
    let rank: HashMap<OrbitPattern, usize> = enumerate_terms(m_in, m_out)
        .iter()
        .enumerate()
        .map(|(k, t)| (term_to_pattern(t), k))
        .collect();
    let mut orbits: Vec<Orbit> = groups
        .into_iter()
        .map(|(pattern, members)| Orbit { pattern, members })
        .collect();
    orbits.sort_by_key(|o| rank[&o.pattern]);
    orbits
}

/// Result of auditing orbit closure under node permutations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitAudit {
    pub permutations_checked: usize,
    pub exhaustive: bool,
    pub closed: bool,
    /// Only computed when the full group is enumerated.
    pub transitive: Option<bool>,
}

/// Checks that every orbit is mapped into itself by node permutations: all of
/// `S_N` when `N ≤ full_group_limit`, otherwise `samples` random ones. With the
/// full group, also checks each orbit is a single orbit.
pub fn audit_orbits<R: Rng + ?Sized>(
    orbits: &[Orbit],
    m_in: usize,
    m_out: usize,
    n_nodes: usize,
    full_group_limit: usize,
    samples: usize,
    rng: &mut R,
) -> OrbitAudit {
    let in_space = FaceSpace::new(n_nodes, m_in, true);
    let out_space = FaceSpace::new(n_nodes, m_out, true);
    let ins = in_space.tuples();
    let outs = out_space.tuples();
    let n_in = ins.len();
    let mut owner = vec![usize::MAX; outs.len() * n_in];
    for (k, orbit) in orbits.iter().enumerate() {
        for &(o, i) in &orbit.members {
            owner[o * n_in + i] = k;
        }
    }
    let perms: Vec<Permutation> = if n_nodes <= full_group_limit {
        Permutation::all(n_nodes).collect()
    } else {
        (0..samples)
            .map(|_| Permutation::random(n_nodes, rng))
            .collect()
    };
    let exhaustive = n_nodes <= full_group_limit;
    let mut closed = owner.iter().all(|&k| k != usize::MAX);
    let image = |perm: &Permutation, o: usize, i: usize| {
        let o2 = out_space.index_unchecked(&perm.apply_tuple(&outs[o]));
        let i2 = in_space.index_unchecked(&perm.apply_tuple(&ins[i]));
        (o2, i2)
    };
    for perm in &perms {
        for (k, orbit) in orbits.iter().enumerate() {
            for &(o, i) in &orbit.members {
                let (o2, i2) = image(perm, o, i);
                closed &= owner[o2 * n_in + i2] == k;
            }
        }
    }
    let transitive = exhaustive.then(|| {
        orbits.iter().all(|orbit| {
            let Some(&(o, i)) = orbit.members.first() else {
                return false;
            };
            let mut reached: Vec<(usize, usize)> = perms.iter().map(|p| image(p, o, i)).collect();
            reached.sort_unstable();
            reached.dedup();
            reached == orbit.members
        })
    });
    OrbitAudit {
        permutations_checked: perms.len(),
        exhaustive,
        closed,
        transitive,
    }
}

/// Integer matrix with rows indexed by output faces and columns by input faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseW {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl DenseW {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseW {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    /// Indicator matrix of an orbit.
    pub fn indicator(orbit: &Orbit, rows: usize, cols: usize) -> Self {
        let mut w = DenseW::zeros(rows, cols);
        for &(o, i) in &orbit.members {
            w.data[o * cols + i] = 1;
        }
        w
    }

    pub fn matvec(&self, x: &[i64]) -> Vec<i64> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Dense matrix of one term: 1 where every matched input position holds the
/// same node as its output partner.
pub fn term_to_dense_w(term: &PoolBroadcastTerm, n_nodes: usize) -> DenseW {
    let ins = FaceSpace::new(n_nodes, term.input_size(), true).tuples();
    let outs = FaceSpace::new(n_nodes, term.output_size(), true).tuples();
    let pairs = term.matched_pairs();
    let mut w = DenseW::zeros(outs.len(), ins.len());
    for (o, out) in outs.iter().enumerate() {
        for (i, inp) in ins.iter().enumerate() {
            if pairs.iter().all(|&(j, b)| inp[j - 1] == out[b - 1]) {
                w.data[o * ins.len() + i] = 1;
            }
        }
    }
    w
}

/// Orbit weights equivalent to a weighting of terms. A term's matrix is the sum
/// of the indicators of every orbit whose matching contains the term's matching,
/// so each orbit collects the weights of the terms it contains.
pub fn term_weights_to_orbit_weights(
    terms: &[PoolBroadcastTerm],
    term_weights: &[i64],
) -> Vec<i64> {
    let patterns: Vec<OrbitPattern> = terms.iter().map(term_to_pattern).collect();
    patterns
        .iter()
        .map(|o| {
            patterns
                .iter()
                .zip(term_weights)
                .filter(|(t, _)| t.pairs.iter().all(|p| o.pairs.contains(p)))
                .map(|(_, w)| w)
                .sum()
        })
        .collect()
}

/// Inverse of [`term_weights_to_orbit_weights`]: Möbius inversion over the
/// sub-matchings of each term's matching.
pub fn orbit_weights_to_term_weights(
    terms: &[PoolBroadcastTerm],
    orbit_weights: &[i64],
) -> Vec<i64> {
    let patterns: Vec<OrbitPattern> = terms.iter().map(term_to_pattern).collect();
    patterns
        .iter()
        .map(|t| {
            patterns
                .iter()
                .zip(orbit_weights)
                .filter(|(o, _)| o.pairs.iter().all(|p| t.pairs.contains(p)))
                .map(|(o, w)| {
                    if (t.pairs.len() - o.pairs.len()) % 2 == 0 {
                        *w
                    } else {
                        -w
                    }
                })
                .sum()
        })
        .collect()
}

fn to_integers(x: &FaceVector) -> Result<Vec<i64>> {
    x.values()
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value.fract() == 0.0 && value.abs() < 9.0e15 {
                Ok(value as i64)
            } else {
                Err(Error::NotIntegral { index, value })
            }
        })
        .collect()
}

/// Dense ground-truth application. `weights` is row-major over orbits,
/// in-channels and out-channels.
pub fn oracle_apply(
    orbits: &[Orbit],
    weights: &[i64],
    x: &FaceVector,
    out_channels: usize,
) -> Result<FaceVector> {
    let cin = x.channels();
    if weights.len() != orbits.len() * cin * out_channels {
        return Err(Error::ShapeMismatch(format!(
            "{} orbits x {cin} x {out_channels} channels need {} weights, got {}",
            orbits.len(),
            orbits.len() * cin * out_channels,
            weights.len()
        )));
    }
    let Some(first) = orbits.first() else {
        return Err(Error::ShapeMismatch("no orbits given".into()));
    };
    let (m_in, m_out) = (first.pattern.input_size, first.pattern.output_size);
    if x.face_size() != m_in || !x.is_directed() {
        return Err(Error::ShapeMismatch(format!(
            "oracle expects a directed size-{m_in} face-vector"
        )));
    }
    let n = x.n_nodes();
    let out_space = FaceSpace::new(n, m_out, true);
    let cols = x.face_count();
    let xi = to_integers(x)?;
    let mut out = vec![0i64; out_space.count() * out_channels];
    for c_in in 0..cin {
        for c_out in 0..out_channels {
            let mut w = DenseW::zeros(out_space.count(), cols);
            for (k, orbit) in orbits.iter().enumerate() {
                let wk = weights[(k * cin + c_in) * out_channels + c_out];
                for &(o, i) in &orbit.members {
                    w.data[o * cols + i] += wk;
                }
            }
            let col: Vec<i64> = (0..cols).map(|f| xi[f * cin + c_in]).collect();
            for (o, v) in w.matvec(&col).into_iter().enumerate() {
                out[o * out_channels + c_out] += v;
            }
        }
    }
    FaceVector::from_values(
        out_space,
        out_channels,
        out.into_iter().map(|v| v as f64).collect(),
    )
}

/// Grid of orbit ids (0-based, in term order) over output faces × input faces.
pub fn sharing_pattern(m_in: usize, m_out: usize, n_nodes: usize) -> Vec<Vec<usize>> {
    let rows = FaceSpace::new(n_nodes, m_out, true).count();
    let cols = FaceSpace::new(n_nodes, m_in, true).count();
    let mut grid = vec![vec![0; cols]; rows];
    for (k, orbit) in enumerate_orbits_unchecked(m_in, m_out, n_nodes)
        .iter()
        .enumerate()
    {
        for &(o, i) in &orbit.members {
            grid[o][i] = k;
        }
    }
    grid
}

/// One `(M, M', N)` row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyCase {
    pub m_in: usize,
    pub m_out: usize,
    pub n_nodes: usize,
    pub orbit_count: usize,
    pub tau: u64,
    /// Orbit count matches `tau`, closure holds, and the dense oracle agrees with `apply_map`.
    #[serde(rename = "match")]
    pub matches: bool,
    pub max_abs_diff: f64,
    /// `N < M + M'`: fewer orbits than terms is the expected outcome.
    pub expected_undercount: bool,
}

/// Orbit count, closure and oracle equivalence for one `(M, M', N)`, using a
/// random integer map and input drawn from `rng`.
pub fn verify_case<R: Rng + ?Sized>(
    m_in: usize,
    m_out: usize,
    n_nodes: usize,
    rng: &mut R,
) -> Result<VerifyCase> {
    let orbits = enumerate_orbits_unchecked(m_in, m_out, n_nodes);
    let t = tau(m_in, m_out);
    let undercount = n_nodes < m_in + m_out;
    if undercount {
        return Ok(VerifyCase {
            m_in,
            m_out,
            n_nodes,
            orbit_count: orbits.len(),
            tau: t,
            matches: (orbits.len() as u64) < t,
            max_abs_diff: 0.0,
            expected_undercount: true,
        });
    }
    let audit = audit_orbits(&orbits, m_in, m_out, n_nodes, 5, 24, rng);
    let sig_in = OrbitSignature::new(vec![(m_in, 1)], 1)?;
    let sig_out = OrbitSignature::new(vec![(m_out, 1)], 1)?;
    let map = EquivariantMap::random_integers(sig_in, sig_out, -3, 3, rng);
    let x = FaceVector::random_integers(FaceSpace::new(n_nodes, m_in, true), 1, -5, 5, rng);
    let y = apply_map(&map, std::slice::from_ref(&x))?.remove(0);
    let block = &map.blocks()[0];
    let term_w: Vec<i64> = block.weights().iter().map(|&w| w as i64).collect();
    let orbit_w = term_weights_to_orbit_weights(block.terms(), &term_w);
    let z = oracle_apply(&orbits, &orbit_w, &x, 1)?;
    let diff = y.max_abs_diff(&z)?;
    Ok(VerifyCase {
        m_in,
        m_out,
        n_nodes,
        orbit_count: orbits.len(),
        tau: t,
        matches: orbits.len() as u64 == t
            && audit.closed
            && audit.transitive != Some(false)
            && diff == 0.0,
        max_abs_diff: diff,
        expected_undercount: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equimap::{apply_term, Aggregator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_and_stirling_values() {
        let bells: Vec<u64> = (0..=8).map(|n| bell(n).unwrap()).collect();
        assert_eq!(bells, vec![1, 1, 2, 5, 15, 52, 203, 877, 4140]);
        assert_eq!(stirling(3, 2).unwrap(), 3);
        assert_eq!(stirling(0, 0).unwrap(), 1);
        assert_eq!(stirling(4, 2).unwrap(), 7);
        assert_eq!(stirling(5, 0).unwrap(), 0);
        for n in 0..=10 {
            let total: u64 = (0..=n).map(|k| stirling(n, k).unwrap()).sum();
            assert_eq!(total, bell(n).unwrap());
        }
        assert!(bell(24).is_ok());
        assert!(matches!(bell(30), Err(Error::Range(_))));
    }

    #[test]
    fn orbit_counts_small_cases() {
        assert_eq!(enumerate_orbits_bruteforce(1, 1, 3).unwrap().len(), 2);
        assert_eq!(enumerate_orbits_bruteforce(2, 2, 5).unwrap().len(), 7);
        assert_eq!(enumerate_orbits_bruteforce(2, 3, 5).unwrap().len(), 13);
        assert!(matches!(
            enumerate_orbits_bruteforce(2, 2, 3),
            Err(Error::UnderResolvedOrbits { needed: 4, .. })
        ));
        assert!(enumerate_orbits_unchecked(2, 2, 3).len() < 7);
    }

    #[test]
    fn orbits_partition_all_pairs() {
        let orbits = enumerate_orbits_bruteforce(2, 2, 4).unwrap();
        let mut total = DenseW::zeros(12, 12);
        for o in &orbits {
            let ind = DenseW::indicator(o, 12, 12);
            for (a, b) in total.data.iter_mut().zip(ind.data) {
                *a += b;
            }
        }
        assert!(total.data.iter().all(|&v| v == 1));
    }

    #[test]
    fn orbit_to_term_examples() {
        let p = OrbitPattern::new(2, 1, vec![]).unwrap();
        assert_eq!(orbit_to_term(&p).unwrap().id(), "P={1,2};B=()");
        let p = OrbitPattern::new(2, 1, vec![(1, 1)]).unwrap();
        assert_eq!(orbit_to_term(&p).unwrap().id(), "P={2};B=(1)");
        let p = OrbitPattern::new(3, 3, vec![(1, 1), (2, 2), (3, 3)]).unwrap();
        assert_eq!(orbit_to_term(&p).unwrap(), PoolBroadcastTerm::identity(3));
        assert!(OrbitPattern::new(2, 2, vec![(1, 1), (2, 1)]).is_err());
    }

    #[test]
    fn orbits_and_terms_are_in_bijection() {
        for m in 1..=3 {
            for m2 in 1..=3 {
                let orbits = enumerate_orbits_bruteforce(m, m2, m + m2).unwrap();
                let terms = enumerate_terms(m, m2);
                assert_eq!(orbits.len(), terms.len());
                for (o, t) in orbits.iter().zip(&terms) {
                    assert_eq!(&orbit_to_term(&o.pattern).unwrap(), t);
                    assert_eq!(term_to_pattern(t), o.pattern);
                }
            }
        }
    }

    #[test]
    fn dense_terms_are_orbit_unions() {
        let n = 4;
        let orbits = enumerate_orbits_bruteforce(2, 2, n).unwrap();
        let terms = enumerate_terms(2, 2);
        let identity = term_to_dense_w(&PoolBroadcastTerm::identity(2), n);
        assert!((0..12).all(|r| (0..12).all(|c| identity.get(r, c) == i64::from(r == c))));
        let all = term_to_dense_w(
            &PoolBroadcastTerm::new(2, 2, vec![1, 2], vec![]).unwrap(),
            n,
        );
        assert!(all.data.iter().all(|&v| v == 1));
        for t in &terms {
            let w = term_to_dense_w(t, n);
            let mut expected = DenseW::zeros(12, 12);
            for o in orbits.iter().filter(|o| {
                term_to_pattern(t)
                    .pairs
                    .iter()
                    .all(|p| o.pattern.pairs.contains(p))
            }) {
                for &(r, c) in &o.members {
                    expected.data[r * 12 + c] = 1;
                }
            }
            assert_eq!(w, expected, "{t}");
        }
        // the fully matched terms are single orbits
        let one = orbits.iter().filter(|o| o.pattern.pairs.len() == 2).count();
        assert_eq!(one, 2);
    }

    #[test]
    fn weight_conversion_round_trips() {
        let terms = enumerate_terms(2, 3);
        let w: Vec<i64> = (0..terms.len() as i64).map(|k| k * 7 - 30).collect();
        let o = term_weights_to_orbit_weights(&terms, &w);
        assert_eq!(orbit_weights_to_term_weights(&terms, &o), w);
    }

    #[test]
    fn oracle_matches_single_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (m, m2) in [(1, 2), (2, 2), (2, 1), (3, 1)] {
            let n = 5;
            let orbits = enumerate_orbits_bruteforce(m, m2, n).unwrap();
            let terms = enumerate_terms(m, m2);
            let x = FaceVector::random_integers(FaceSpace::new(n, m, true), 1, -9, 9, &mut rng);
            for (k, t) in terms.iter().enumerate() {
                let mut tw = vec![0; terms.len()];
                tw[k] = 1;
                let ow = term_weights_to_orbit_weights(&terms, &tw);
                let z = oracle_apply(&orbits, &ow, &x, 1).unwrap();
                assert_eq!(z, apply_term(t, &x, Aggregator::Sum).unwrap(), "{t}");
            }
            let zero = oracle_apply(&orbits, &vec![0; orbits.len()], &x, 1).unwrap();
            assert!(zero.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn oracle_rejects_fractions() {
        let orbits = enumerate_orbits_bruteforce(1, 1, 3).unwrap();
        let x =
            FaceVector::from_values(FaceSpace::new(3, 1, true), 1, vec![0.5, 1.0, 2.0]).unwrap();
        assert!(matches!(
            oracle_apply(&orbits, &[1, 1], &x, 1),
            Err(Error::NotIntegral { index: 0, .. })
        ));
    }

    #[test]
    fn audit_finds_closed_transitive_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let orbits = enumerate_orbits_bruteforce(2, 2, 4).unwrap();
        let audit = audit_orbits(&orbits, 2, 2, 4, 5, 0, &mut rng);
        assert!(audit.closed);
        assert_eq!(audit.transitive, Some(true));
        assert_eq!(audit.permutations_checked, 24);

        // merging two orbits keeps closure but breaks transitivity
        let mut merged = orbits.clone();
        let last = merged.pop().unwrap();
        merged.last_mut().unwrap().members.extend(last.members);
        merged.last_mut().unwrap().members.sort_unstable();
        let audit = audit_orbits(&merged, 2, 2, 4, 5, 0, &mut rng);
        assert_eq!(audit.transitive, Some(false));
    }

    #[test]
    fn sharing_symbols() {
        let distinct = |g: Vec<Vec<usize>>| {
            let mut s: Vec<usize> = g.into_iter().flatten().collect();
            s.sort_unstable();
            s.dedup();
            s.len()
        };
        assert_eq!(distinct(sharing_pattern(1, 1, 5)), 2);
        assert_eq!(distinct(sharing_pattern(2, 2, 5)), 7);
        assert_eq!(distinct(sharing_pattern(2, 3, 5)), 13);
    }

    #[test]
    fn verify_case_reports() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ok = verify_case(2, 2, 4, &mut rng).unwrap();
        assert!(ok.matches && !ok.expected_undercount);
        assert_eq!(ok.orbit_count, 7);
        let under = verify_case(2, 2, 3, &mut rng).unwrap();
        assert!(under.expected_undercount && under.matches);
        assert!(under.orbit_count < 7);
    }
}
