//! Faces over a node set `[N] = {1, .., N}`.
//!
//! A directed face is an ordered tuple of distinct node ids; an undirected face
//! is stored as its ascending-sorted tuple. Faces of one `(N, M, directed)`
//! space are enumerated in lexicographic order, and that order defines
//! [`FaceIndex`]. Ranking and unranking are computed arithmetically, so no
//! lookup tables are needed.

use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based node identifier.
pub type NodeId = u32;

/// Position of a face within the canonical enumeration of its face space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FaceIndex(pub usize);

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `n! / (n - k)!`, the number of injective sequences of length `k` from `n` items.
pub fn falling_factorial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (n - k + 1..=n).product()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    nodes: Vec<NodeId>,
    directed: bool,
}

impl Face {
    /// Builds a face, validating node ids against `n_nodes`. Undirected faces are
    /// sorted into canonical form.
    pub fn new(nodes: Vec<NodeId>, directed: bool, n_nodes: usize) -> Result<Self> {
        validate_tuple(&nodes, n_nodes)?;
        let mut nodes = nodes;
        if !directed {
            nodes.sort_unstable();
        }
        Ok(Face { nodes, directed })
    }

    pub fn directed(nodes: Vec<NodeId>, n_nodes: usize) -> Result<Self> {
        Self::new(nodes, true, n_nodes)
    }

    pub fn undirected(nodes: Vec<NodeId>, n_nodes: usize) -> Result<Self> {
        Self::new(nodes, false, n_nodes)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn into_nodes(self) -> Vec<NodeId> {
        self.nodes
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (open, close) = if self.directed {
            ("(", ")")
        } else {
            ("{", "}")
        };
        write!(f, "{open}{}{close}", self.nodes.iter().join(","))
    }
}

fn validate_tuple(nodes: &[NodeId], n_nodes: usize) -> Result<()> {
    let bad = |reason: &str| Error::InvalidFace {
        face: nodes.to_vec(),
        n_nodes,
        reason: reason.to_string(),
    };
    for (i, &v) in nodes.iter().enumerate() {
        if v == 0 || v as usize > n_nodes {
            return Err(bad("node id out of range"));
        }
        if nodes[..i].contains(&v) {
            return Err(bad("repeated node id"));
        }
    }
    Ok(())
}

/// All faces of one size over `[N]`, either directed or undirected.
///
/// Size 0 is allowed and has exactly one (empty) face; it is the shape of a
/// fully pooled scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceSpace {
    pub n_nodes: usize,
    pub face_size: usize,
    pub directed: bool,
}

impl FaceSpace {
    /// A face size above `n_nodes` gives an empty space.
    pub fn new(n_nodes: usize, face_size: usize, directed: bool) -> Self {
        FaceSpace {
            n_nodes,
            face_size,
            directed,
        }
    }

    pub fn count(&self) -> usize {
        if self.directed {
            falling_factorial(self.n_nodes, self.face_size)
        } else {
            binomial(self.n_nodes, self.face_size)
        }
    }

    /// Every face tuple in canonical order.
    pub fn tuples(&self) -> Vec<Vec<NodeId>> {
        let nodes = 1..=self.n_nodes as NodeId;
        if self.directed {
            nodes.permutations(self.face_size).collect()
        } else {
            nodes.combinations(self.face_size).collect()
        }
    }

    pub fn faces(&self) -> Vec<Face> {
        let directed = self.directed;
        self.tuples()
            .into_iter()
            .map(|nodes| Face { nodes, directed })
            .collect()
    }

    /// Rank of a tuple. For undirected spaces the tuple may be given in any order.
    pub fn index_of(&self, nodes: &[NodeId]) -> Result<usize> {
        if nodes.len() != self.face_size {
            return Err(Error::InvalidFace {
                face: nodes.to_vec(),
                n_nodes: self.n_nodes,
                reason: format!("expected {} nodes", self.face_size),
            });
        }
        validate_tuple(nodes, self.n_nodes)?;
        Ok(if self.directed {
            self.rank_directed(nodes)
        } else {
            let mut sorted = nodes.to_vec();
            sorted.sort_unstable();
            self.rank_sorted(&sorted)
        })
    }

    /// Rank of a tuple already known to be valid (distinct, in range) for this space.
    /// Undirected tuples must be sorted.
    pub(crate) fn index_unchecked(&self, nodes: &[NodeId]) -> usize {
        if self.directed {
            self.rank_directed(nodes)
        } else {
            self.rank_sorted(nodes)
        }
    }

    fn rank_sorted(&self, sorted: &[NodeId]) -> usize {
        let (n, m) = (self.n_nodes, self.face_size);
        let mut rank = 0;
        let mut prev = 0usize;
        for (j, &c) in sorted.iter().enumerate() {
            for v in prev + 1..c as usize {
                rank += binomial(n - v, m - j - 1);
            }
            prev = c as usize;
        }
        rank
    }

    fn rank_directed(&self, nodes: &[NodeId]) -> usize {
        let (n, m) = (self.n_nodes, self.face_size);
        let mut rank = 0;
        for (j, &d) in nodes.iter().enumerate() {
            let smaller_unused = (1..d).filter(|v| !nodes[..j].contains(v)).count();
            rank += smaller_unused * falling_factorial(n - j - 1, m - j - 1);
        }
        rank
    }

    pub fn face_at(&self, index: usize) -> Result<Face> {
        if index >= self.count() {
            return Err(Error::InvalidSignature(format!(
                "face index {index} out of range for {} faces",
                self.count()
            )));
        }
        let (n, m) = (self.n_nodes, self.face_size);
        let mut rest = index;
        let mut nodes = Vec::with_capacity(m);
        if self.directed {
            let mut unused: Vec<NodeId> = (1..=n as NodeId).collect();
            for j in 0..m {
                let block = falling_factorial(n - j - 1, m - j - 1);
                nodes.push(unused.remove(rest / block));
                rest %= block;
            }
        } else {
            let mut v = 1usize;
            for j in 0..m {
                loop {
                    let block = binomial(n - v, m - j - 1);
                    if rest < block {
                        break;
                    }
                    rest -= block;
                    v += 1;
                }
                nodes.push(v as NodeId);
                v += 1;
            }
        }
        Ok(Face {
            nodes,
            directed: self.directed,
        })
    }
}

/// Every face of the given size in canonical order.
pub fn enumerate_faces(n_nodes: usize, face_size: usize, directed: bool) -> Result<Vec<Face>> {
    if face_size == 0 || face_size > n_nodes {
        return Err(Error::InvalidSignature(format!(
            "face size must lie in 1..={n_nodes}, got {face_size}"
        )));
    }
    Ok(FaceSpace::new(n_nodes, face_size, directed).faces())
}

pub fn face_to_index(face: &Face, n_nodes: usize) -> Result<FaceIndex> {
    FaceSpace::new(n_nodes, face.size(), face.directed)
        .index_of(&face.nodes)
        .map(FaceIndex)
}

pub fn index_to_face(
    index: FaceIndex,
    n_nodes: usize,
    face_size: usize,
    directed: bool,
) -> Result<Face> {
    FaceSpace::new(n_nodes, face_size, directed).face_at(index.0)
}

/// A permutation of `[N]`, stored as the 1-based image of each node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<NodeId>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n as NodeId).collect(),
        }
    }

    /// `images[i]` is where node `i + 1` is sent.
    pub fn from_images(images: Vec<NodeId>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v as usize > n || seen[v as usize] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 1..={n}"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { images })
    }

    pub fn transposition(n: usize, a: NodeId, b: NodeId) -> Result<Self> {
        let mut images: Vec<NodeId> = (1..=n as NodeId).collect();
        if a == 0 || b == 0 || a as usize > n || b as usize > n {
            return Err(Error::InvalidPermutation(format!(
                "transposition ({a} {b}) out of range for {n} nodes"
            )));
        }
        images.swap(a as usize - 1, b as usize - 1);
        Ok(Permutation { images })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<NodeId> = (1..=n as NodeId).collect();
        images.shuffle(rng);
        Permutation { images }
    }

    /// All `n!` permutations in lexicographic order of their image tuples.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (1..=n as NodeId)
            .permutations(n)
            .map(|images| Permutation { images })
    }

    pub fn n_nodes(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[NodeId] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, node: NodeId) -> NodeId {
        self.images[node as usize - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v as usize - 1] = i as NodeId + 1;
        }
        Permutation { images }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation {
            images: other.images.iter().map(|&v| self.apply(v)).collect(),
        }
    }

    /// Applies the permutation to each entry of a tuple, keeping positions.
    pub fn apply_tuple(&self, nodes: &[NodeId]) -> Vec<NodeId> {
        nodes.iter().map(|&v| self.apply(v)).collect()
    }
}

pub fn permute_face(face: &Face, perm: &Permutation) -> Result<Face> {
    if let Some(&v) = face.nodes.iter().find(|&&v| v as usize > perm.n_nodes()) {
        return Err(Error::InvalidFace {
            face: face.nodes.clone(),
            n_nodes: perm.n_nodes(),
            reason: format!("node {v} outside permutation domain"),
        });
    }
    let mut nodes = perm.apply_tuple(&face.nodes);
    if !face.directed {
        nodes.sort_unstable();
    }
    Ok(Face {
        nodes,
        directed: face.directed,
    })
}
