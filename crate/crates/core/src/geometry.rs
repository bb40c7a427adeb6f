//! Simplicial complexes and graded posets as sources of incidence tensors.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::faces::{Face, FaceSpace, NodeId};
use crate::tensors::{
    densify, ConstraintSet, Dim, IncidenceTensor, Mask, Position, TensorSignature,
};

/// A face set closed under taking subsets (subsequences when directed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    n_nodes: usize,
    directed: bool,
    /// Faces grouped by size; index `k` holds the faces of size `k + 1`.
    faces: Vec<BTreeSet<Face>>,
}

impl SimplicialComplex {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Faces of one size, in canonical order.
    pub fn faces_of_size(&self, size: usize) -> Vec<Face> {
        size.checked_sub(1)
            .and_then(|k| self.faces.get(k))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    pub fn all_faces(&self) -> Vec<Face> {
        self.faces.iter().flatten().cloned().collect()
    }

    /// Number of faces of each size, starting at size 1.
    pub fn counts(&self) -> Vec<usize> {
        self.faces.iter().map(BTreeSet::len).collect()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.faces.len().checked_sub(1)
    }

    /// Counts in words, e.g. "5 nodes, 9 edges, 7 triangles, 2 tetrahedra".
    pub fn summary(&self) -> String {
        if self.faces.is_empty() {
            return "empty complex".into();
        }
        self.counts()
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let (one, many) = match k + 1 {
                    1 => ("node", "nodes"),
                    2 => ("edge", "edges"),
                    3 => ("triangle", "triangles"),
                    4 => ("tetrahedron", "tetrahedra"),
                    _ => ("", ""),
                };
                if one.is_empty() {
                    format!("{c} faces of size {}", k + 1)
                } else {
                    format!("{c} {}", if c == 1 { one } else { many })
                }
            })
            .join(", ")
    }
}

/// Smallest complex containing every facet.
pub fn closure(facets: &[Face], n_nodes: usize) -> Result<SimplicialComplex> {
    let directed = facets.first().is_some_and(Face::is_directed);
    if facets.iter().any(|f| f.is_directed() != directed) {
        return Err(Error::Unsupported(
            "facets mix directed and undirected faces".into(),
        ));
    }
    let mut faces: Vec<BTreeSet<Face>> = Vec::new();
    for facet in facets {
        let nodes = facet.nodes();
        if let Some(&v) = nodes.iter().find(|&&v| v as usize > n_nodes) {
            return Err(Error::InvalidFace {
                face: nodes.to_vec(),
                n_nodes,
                reason: format!("node {v} outside the complex"),
            });
        }
        if faces.len() < nodes.len() {
            faces.resize(nodes.len(), BTreeSet::new());
        }
        // subsequences of the stored tuple cover subsets in the undirected case
        for size in 1..=nodes.len() {
            for sub in nodes.iter().copied().combinations(size) {
                faces[size - 1].insert(Face::new(sub, directed, n_nodes)?);
            }
        }
    }
    Ok(SimplicialComplex {
        n_nodes,
        directed,
        faces,
    })
}

/// Incidence between faces of size `row_size` and `col_size` of a complex.
///
/// Faces of different sizes are incident when one contains the other. Faces of
/// equal size are incident when they share at least `shared` nodes, where
/// `shared` defaults to `size - 1`; each face is incident to itself.
pub fn incidence_from_complex(
    complex: &SimplicialComplex,
    row_size: usize,
    col_size: usize,
    shared: Option<usize>,
) -> Result<(IncidenceTensor, Mask)> {
    if complex.directed {
        return Err(Error::Unsupported(
            "incidence tensors from directed complexes".into(),
        ));
    }
    let n = complex.n_nodes;
    for size in [row_size, col_size] {
        if size == 0 || size > n {
            return Err(Error::Unsupported(format!("face size {size} on {n} nodes")));
        }
    }
    let tied = if row_size == col_size {
        let s = shared.unwrap_or(row_size - 1);
        if s == 0 || s > row_size {
            return Err(Error::Unsupported(format!(
                "same-size incidence of size-{row_size} faces needs a shared size in 1..={row_size}, got {s}"
            )));
        }
        s
    } else {
        if shared.is_some() {
            return Err(Error::Unsupported(
                "a shared size only applies to faces of equal size".into(),
            ));
        }
        row_size.min(col_size)
    };
    let groups = (0..tied)
        .map(|i| vec![Position::new(0, i), Position::new(1, i)])
        .collect();
    let signature = TensorSignature::new(
        vec![Dim::new(row_size, false), Dim::new(col_size, false)],
        ConstraintSet::new(groups)?,
    )?;
    densify(
        &[
            complex.faces_of_size(row_size),
            complex.faces_of_size(col_size),
        ],
        n,
        &signature,
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct PosetElement {
    pub id: i64,
    pub nodes: Vec<NodeId>,
    pub rank: usize,
}

/// A finite poset given by its elements and covering pairs `(lower, upper)`.
/// The order is the transitive closure of the covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedPoset {
    elements: Vec<PosetElement>,
    covers: Vec<(usize, usize)>,
    /// `less[a][b]` iff element `a` lies strictly below element `b`.
    less: Vec<Vec<bool>>,
}

impl GradedPoset {
    pub fn new(elements: Vec<PosetElement>, covers: &[(i64, i64)]) -> Result<Self> {
        let mut index = HashMap::new();
        for (k, e) in elements.iter().enumerate() {
            if index.insert(e.id, k).is_some() {
                return Err(Error::InvalidPoset(format!(
                    "duplicate element id {}",
                    e.id
                )));
            }
            if e.nodes.iter().duplicates().next().is_some() || e.nodes.contains(&0) {
                return Err(Error::InvalidPoset(format!(
                    "element {} has repeated or zero node ids",
                    e.id
                )));
            }
        }
        let lookup = |id: i64| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::InvalidPoset(format!("cover names unknown element {id}")))
        };
        let covers = covers
            .iter()
            .map(|&(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let n = elements.len();
        let mut less = vec![vec![false; n]; n];
        for &(a, b) in &covers {
            less[a][b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                if less[a][k] {
                    let via = less[k].clone();
                    for (dst, &through) in less[a].iter_mut().zip(&via) {
                        *dst |= through;
                    }
                }
            }
        }
        Ok(GradedPoset {
            elements,
            covers,
            less,
        })
    }

    pub fn elements(&self) -> &[PosetElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.less[a][b]
    }

    /// Number of elements at each rank from 0 to the maximum rank.
    pub fn rank_sizes(&self) -> Vec<usize> {
        let top = self.elements.iter().map(|e| e.rank).max();
        let mut sizes = vec![0; top.map_or(0, |t| t + 1)];
        for e in &self.elements {
            sizes[e.rank] += 1;
        }
        sizes
    }

    fn at_rank(&self, rank: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.elements[k].rank == rank)
            .collect()
    }

    /// Given covering pairs that are not implied by longer chains.
    fn true_covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        self.covers
            .iter()
            .copied()
            .filter(|&(a, b)| !(0..n).any(|c| self.less[a][c] && self.less[c][b]))
            .unique()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosetReport {
    pub valid: bool,
    pub rank_sizes: Vec<usize>,
    pub violations: Vec<String>,
}

/// Checks irreflexivity, transitivity and both rank axioms.
pub fn validate_poset(p: &GradedPoset) -> PosetReport {
    let n = p.len();
    let id = |k: usize| p.elements[k].id;
    let mut violations = Vec::new();
    for a in 0..n {
        if p.less[a][a] {
            violations.push(format!("element {} lies below itself", id(a)));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !p.less[a][b] {
                continue;
            }
            if (0..n).any(|c| p.less[b][c] && !p.less[a][c]) {
                violations.push(format!(
                    "order is not transitive through {} < {}",
                    id(a),
                    id(b)
                ));
            }
            if a != b && p.elements[a].rank >= p.elements[b].rank {
                violations.push(format!(
                    "{} < {} but rank {} is not below rank {}",
                    id(a),
                    id(b),
                    p.elements[a].rank,
                    p.elements[b].rank
                ));
            }
        }
    }
    for (a, b) in p.true_covers() {
        if a != b && p.elements[b].rank != p.elements[a].rank + 1 {
            violations.push(format!(
                "{} covers {} but ranks differ by {}",
                id(b),
                id(a),
                p.elements[b].rank as i64 - p.elements[a].rank as i64
            ));
        }
    }
    PosetReport {
        valid: violations.is_empty(),
        rank_sizes: p.rank_sizes(),
        violations,
    }
}

fn uniform_size(p: &GradedPoset, rank: usize) -> Result<usize> {
    let sizes: BTreeSet<usize> = p
        .at_rank(rank)
        .iter()
        .map(|&k| p.elements[k].nodes.len())
        .collect();
    match sizes.len() {
        0 => Err(Error::InvalidPoset(format!("no elements of rank {rank}"))),
        1 => Ok(*sizes.first().expect("one size")),
        _ => Err(Error::UnsupportedIrregular { rank }),
    }
}

/// Incidence between the elements of two ranks, with each element placed at
/// its node set among all faces of that size. Elements of different ranks are
/// incident when ordered; elements of one rank are incident when some element
/// of rank `shared` (default one lower) lies below both.
pub fn incidence_from_poset(
    p: &GradedPoset,
    rank_a: usize,
    rank_b: usize,
    shared: Option<usize>,
) -> Result<(IncidenceTensor, Mask)> {
    let (size_a, size_b) = (uniform_size(p, rank_a)?, uniform_size(p, rank_b)?);
    let n_nodes = p
        .elements
        .iter()
        .flat_map(|e| e.nodes.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    let shared_rank = if rank_a == rank_b {
        let s = shared.or(rank_a.checked_sub(1)).ok_or_else(|| {
            Error::Unsupported("same-rank incidence at rank 0 needs a shared rank".into())
        })?;
        if s >= rank_a {
            return Err(Error::Unsupported(format!(
                "shared rank {s} must lie below rank {rank_a}"
            )));
        }
        Some(s)
    } else {
        None
    };
    let signature = TensorSignature::new(
        vec![Dim::new(size_a, false), Dim::new(size_b, false)],
        ConstraintSet::empty(),
    )?;
    let space_a = FaceSpace::new(n_nodes, size_a, false);
    let space_b = FaceSpace::new(n_nodes, size_b, false);
    let place = |rank: usize, space: &FaceSpace| -> Result<BTreeMap<usize, usize>> {
        let mut seen = BTreeMap::new();
        let mut out = BTreeMap::new();
        for k in p.at_rank(rank) {
            let idx = space.index_of(&p.elements[k].nodes)?;
            if let Some(other) = seen.insert(idx, p.elements[k].id) {
                return Err(Error::InvalidPoset(format!(
                    "elements {other} and {} of rank {rank} share a node set",
                    p.elements[k].id
                )));
            }
            out.insert(k, idx);
        }
        Ok(out)
    };
    let rows = place(rank_a, &space_a)?;
    let cols = place(rank_b, &space_b)?;
    let lower = shared_rank.map(|s| p.at_rank(s)).unwrap_or_default();
    let mut tensor = IncidenceTensor::zeros(n_nodes, signature, 1);
    let mut bits = vec![false; tensor.entry_count()];
    for (&a, &ia) in &rows {
        for (&b, &ib) in &cols {
            let related = match shared_rank {
                None => p.less[a][b] || p.less[b][a],
                Some(_) => a == b || lower.iter().any(|&c| p.less[c][a] && p.less[c][b]),
            };
            if related {
                let e = tensor.entry_index(&[ia, ib]);
                bits[e] = true;
                tensor.set(e, 0, 1.0)?;
            }
        }
    }
    Ok((tensor, Mask::new(bits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::Permutation;
    use crate::tensors::permute_tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn und(nodes: &[NodeId], n: usize) -> Face {
        Face::undirected(nodes.to_vec(), n).unwrap()
    }

    fn bipyramid() -> SimplicialComplex {
        closure(&[und(&[1, 2, 3, 4], 5), und(&[1, 2, 3, 5], 5)], 5).unwrap()
    }

    #[test]
    fn bipyramid_counts() {
        let c = bipyramid();
        assert_eq!(c.counts(), vec![5, 9, 7, 2]);
        assert_eq!(c.summary(), "5 nodes, 9 edges, 7 triangles, 2 tetrahedra");
    }

    #[test]
    fn small_closures() {
        let c = closure(&[und(&[1, 2], 4)], 4).unwrap();
        assert_eq!(c.counts(), vec![2, 1]);
        let empty = closure(&[], 3).unwrap();
        assert!(empty.counts().is_empty());
        assert_eq!(empty.summary(), "empty complex");
        assert!(closure(&[und(&[1, 2], 4)], 1).is_err());
    }

    #[test]
    fn closure_is_idempotent() {
        let c = bipyramid();
        assert_eq!(closure(&c.all_faces(), 5).unwrap(), c);
    }

    #[test]
    fn directed_closure_keeps_subsequences() {
        let f = Face::directed(vec![3, 1, 2], 3).unwrap();
        let c = closure(&[f], 3).unwrap();
        let edges: Vec<Vec<NodeId>> = c
            .faces_of_size(2)
            .iter()
            .map(|f| f.nodes().to_vec())
            .collect();
        assert_eq!(edges, vec![vec![1, 2], vec![3, 1], vec![3, 2]]);
        assert!(incidence_from_complex(&c, 1, 2, None).is_err());
    }

    #[test]
    fn node_triangle_columns_have_three_ones() {
        let c = bipyramid();
        let (t, mask) = incidence_from_complex(&c, 1, 3, None).unwrap();
        let cols = FaceSpace::new(5, 3, false).count();
        let present: Vec<Face> = c.faces_of_size(3);
        for (j, f) in FaceSpace::new(5, 3, false).faces().iter().enumerate() {
            let ones = (0..5).filter(|&i| mask.get(i * cols + j)).count();
            assert_eq!(ones, if present.contains(f) { 3 } else { 0 });
        }
        assert_eq!(t.values().iter().sum::<f64>(), 21.0);
    }

    #[test]
    fn reversed_sizes_transpose() {
        let c = bipyramid();
        let (_, a) = incidence_from_complex(&c, 1, 2, None).unwrap();
        let (_, b) = incidence_from_complex(&c, 2, 1, None).unwrap();
        let edges = 10;
        for i in 0..5 {
            for j in 0..edges {
                assert_eq!(a.get(i * edges + j), b.get(j * 5 + i));
            }
        }
    }

    #[test]
    fn complete_graph_edges_touch_two_nodes() {
        let facets = FaceSpace::new(4, 2, false).faces();
        let c = closure(&facets, 4).unwrap();
        let (_, mask) = incidence_from_complex(&c, 1, 2, None).unwrap();
        for j in 0..6 {
            assert_eq!((0..4).filter(|&i| mask.get(i * 6 + j)).count(), 2);
        }
    }

    #[test]
    fn path_edges_share_a_node() {
        let c = closure(&[und(&[1, 2], 3), und(&[2, 3], 3)], 3).unwrap();
        let (_, mask) = incidence_from_complex(&c, 2, 2, None).unwrap();
        // edges {1,2}=0 {1,3}=1 {2,3}=2
        assert!(mask.get(2) && mask.get(6));
        assert!(mask.get(0) && mask.get(8));
        assert_eq!(mask.count_ones(), 4);
        assert!(incidence_from_complex(&c, 1, 1, None).is_err());
    }

    #[test]
    fn masks_follow_node_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let facets = [und(&[1, 2, 3, 4], 5), und(&[1, 2, 3, 5], 5)];
        for _ in 0..5 {
            let perm = Permutation::random(5, &mut rng);
            let moved: Vec<Face> = facets
                .iter()
                .map(|f| crate::faces::permute_face(f, &perm).unwrap())
                .collect();
            for (a, b) in [(1, 3), (2, 3), (2, 2)] {
                let (t, _) = incidence_from_complex(&bipyramid(), a, b, None).unwrap();
                let (u, _) =
                    incidence_from_complex(&closure(&moved, 5).unwrap(), a, b, None).unwrap();
                assert_eq!(permute_tensor(&t, &perm).unwrap(), u);
            }
        }
    }

    fn cube() -> GradedPoset {
        let vertices: Vec<[u32; 3]> = (0..8).map(|v| [v & 1, v >> 1 & 1, v >> 2 & 1]).collect();
        let mut elements = Vec::new();
        let mut covers = Vec::new();
        for v in 0..8 {
            elements.push(PosetElement {
                id: v as i64 + 1,
                nodes: vec![v + 1],
                rank: 0,
            });
        }
        let mut next = 9;
        let mut edge_ids = Vec::new();
        for a in 0..8usize {
            for b in a + 1..8 {
                let diff = (0..3).filter(|&k| vertices[a][k] != vertices[b][k]).count();
                if diff == 1 {
                    elements.push(PosetElement {
                        id: next,
                        nodes: vec![a as u32 + 1, b as u32 + 1],
                        rank: 1,
                    });
                    covers.push((a as i64 + 1, next));
                    covers.push((b as i64 + 1, next));
                    edge_ids.push((next, a, b));
                    next += 1;
                }
            }
        }
        #[allow(clippy::needless_range_loop)]
        for axis in 0..3 {
            for side in 0..2 {
                let corners: Vec<usize> = (0..8).filter(|&v| vertices[v][axis] == side).collect();
                elements.push(PosetElement {
                    id: next,
                    nodes: corners.iter().map(|&v| v as u32 + 1).collect(),
                    rank: 2,
                });
                for &(e, a, b) in &edge_ids {
                    if corners.contains(&a) && corners.contains(&b) {
                        covers.push((e, next));
                    }
                }
                next += 1;
            }
        }
        GradedPoset::new(elements, &covers).unwrap()
    }

    #[test]
    fn cube_poset_is_valid() {
        let p = cube();
        let r = validate_poset(&p);
        assert!(r.valid, "{:?}", r.violations);
        assert_eq!(r.rank_sizes, vec![8, 12, 6]);
    }

    #[test]
    fn cube_incidences() {
        let p = cube();
        let (_, m01) = incidence_from_poset(&p, 0, 1, None).unwrap();
        assert_eq!(m01.count_ones(), 24);
        let (_, m02) = incidence_from_poset(&p, 0, 2, None).unwrap();
        assert_eq!(m02.count_ones(), 24);
        // squares sharing an edge: each square meets 4 others plus itself
        let (_, m22) = incidence_from_poset(&p, 2, 2, None).unwrap();
        assert_eq!(m22.count_ones(), 30);
    }

    #[test]
    fn unrelated_ranks_give_zero_mask() {
        let elements = vec![
            PosetElement {
                id: 1,
                nodes: vec![1],
                rank: 0,
            },
            PosetElement {
                id: 2,
                nodes: vec![2, 3],
                rank: 1,
            },
        ];
        let p = GradedPoset::new(elements, &[]).unwrap();
        let (_, m) = incidence_from_poset(&p, 0, 1, None).unwrap();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn rank_gap_is_reported() {
        let elements = vec![
            PosetElement {
                id: 1,
                nodes: vec![1],
                rank: 0,
            },
            PosetElement {
                id: 2,
                nodes: vec![1, 2, 3],
                rank: 2,
            },
        ];
        let p = GradedPoset::new(elements, &[(1, 2)]).unwrap();
        let r = validate_poset(&p);
        assert!(!r.valid);
        assert!(r.violations[0].contains("ranks differ by 2"));
        assert!(validate_poset(&GradedPoset::new(vec![], &[]).unwrap()).valid);
    }

    #[test]
    fn cycles_and_rank_inversions_are_reported() {
        let elements = vec![
            PosetElement {
                id: 1,
                nodes: vec![1],
                rank: 0,
            },
            PosetElement {
                id: 2,
                nodes: vec![2],
                rank: 1,
            },
        ];
        let p = GradedPoset::new(elements, &[(1, 2), (2, 1)]).unwrap();
        let r = validate_poset(&p);
        assert!(r.violations.iter().any(|v| v.contains("below itself")));
        assert!(r.violations.iter().any(|v| v.contains("is not below")));
        assert!(GradedPoset::new(vec![], &[(1, 2)]).is_err());
    }

    #[test]
    fn irregular_rank_is_rejected() {
        let elements = vec![
            PosetElement {
                id: 1,
                nodes: vec![1, 2, 3],
                rank: 2,
            },
            PosetElement {
                id: 2,
                nodes: vec![1, 2, 3, 4],
                rank: 2,
            },
            PosetElement {
                id: 3,
                nodes: vec![1],
                rank: 0,
            },
        ];
        let p = GradedPoset::new(elements, &[]).unwrap();
        assert!(matches!(
            incidence_from_poset(&p, 0, 2, None),
            Err(Error::UnsupportedIrregular { rank: 2 })
        ));
    }
}
