//! Face-vectors, constrained incidence tensors and their orbit decomposition.
//!
//! An incidence tensor of order `D` is indexed by one face per dimension. Its
//! node positions `(d, i)` are grouped by a [`ConstraintSet`]; an entry may be
//! nonzero only when every group holds a single node id. Under the node
//! permutation action the entries split into orbits, one per admissible
//! set-partition of the positions, and each orbit is a directed face-vector of
//! size equal to the number of blocks.
//!
//! Undirected dimensions are handled through their directed cover: every
//! ordering of an undirected face carries the face's value, and an entry is
//! admissible when at least one ordering satisfies the constraints.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{Face, FaceSpace, NodeId, Permutation};

/// Dense values over all faces of one face space, with a trailing channel axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVector {
    space: FaceSpace,
    channels: usize,
    values: Vec<f64>,
}

impl FaceVector {
    pub fn zeros(space: FaceSpace, channels: usize) -> Self {
        FaceVector {
            space,
            channels,
            values: vec![0.0; space.count() * channels],
        }
    }

    pub fn from_values(space: FaceSpace, channels: usize, values: Vec<f64>) -> Result<Self> {
        let expected = space.count() * channels;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "face-vector of {} faces x {channels} channels needs {expected} values, got {}",
                space.count(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(FaceVector {
            space,
            channels,
            values,
        })
    }

    /// Random integer values in `lo..=hi`.
    pub fn random_integers<R: Rng + ?Sized>(
        space: FaceSpace,
        channels: usize,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Self {
        let values = (0..space.count() * channels)
            .map(|_| rng.random_range(lo..=hi) as f64)
            .collect();
        FaceVector {
            space,
            channels,
            values,
        }
    }

    pub fn space(&self) -> FaceSpace {
        self.space
    }

    pub fn n_nodes(&self) -> usize {
        self.space.n_nodes
    }

    pub fn face_size(&self) -> usize {
        self.space.face_size
    }

    pub fn is_directed(&self) -> bool {
        self.space.directed
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn face_count(&self) -> usize {
        self.space.count()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, face: usize, channel: usize) -> f64 {
        self.values[face * self.channels + channel]
    }

    /// Value at a face given by its node tuple.
    pub fn value_at(&self, nodes: &[NodeId], channel: usize) -> Result<f64> {
        let idx = self.space.index_of(nodes)?;
        Ok(self.get(idx, channel))
    }

    /// `(π·x)[π·f] = x[f]`.
    pub fn permute(&self, perm: &Permutation) -> Result<FaceVector> {
        if perm.n_nodes() != self.n_nodes() {
            return Err(Error::InvalidPermutation(format!(
                "permutation on {} nodes applied to face-vector on {}",
                perm.n_nodes(),
                self.n_nodes()
            )));
        }
        let mut out = FaceVector::zeros(self.space, self.channels);
        let c = self.channels;
        for (i, t) in self.space.tuples().into_iter().enumerate() {
            let mut image = perm.apply_tuple(&t);
            if !self.space.directed {
                image.sort_unstable();
            }
            let j = self.space.index_unchecked(&image);
            out.values[j * c..(j + 1) * c].copy_from_slice(&self.values[i * c..(i + 1) * c]);
        }
        Ok(out)
    }

    /// The directed cover: every ordering of an undirected face takes its value.
    pub fn to_directed(&self) -> FaceVector {
        if self.space.directed {
            return self.clone();
        }
        let space = FaceSpace::new(self.n_nodes(), self.face_size(), true);
        let mut out = FaceVector::zeros(space, self.channels);
        let c = self.channels;
        for (j, t) in space.tuples().into_iter().enumerate() {
            let mut sorted = t;
            sorted.sort_unstable();
            let i = self.space.index_unchecked(&sorted);
            out.values[j * c..(j + 1) * c].copy_from_slice(&self.values[i * c..(i + 1) * c]);
        }
        out
    }

    /// Largest deviation between a directed face-vector and its values under
    /// reordering of each face tuple. Zero for undirected vectors.
    pub fn asymmetry(&self) -> f64 {
        if !self.space.directed {
            return 0.0;
        }
        let c = self.channels;
        let mut worst: f64 = 0.0;
        for (i, t) in self.space.tuples().into_iter().enumerate() {
            let mut sorted = t;
            sorted.sort_unstable();
            let j = self.space.index_unchecked(&sorted);
            for ch in 0..c {
                worst = worst.max((self.values[i * c + ch] - self.values[j * c + ch]).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &FaceVector) -> Result<f64> {
        if self.space != other.space || self.channels != other.channels {
            return Err(Error::ShapeMismatch(
                "face-vectors differ in face space or channels".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// A node position `(d, i)`: slot `i` of the face indexing dimension `d`. Both
/// are 0-based here; text and JSON forms are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub dim: usize,
    pub slot: usize,
}

impl Position {
    pub fn new(dim: usize, slot: usize) -> Self {
        Position { dim, slot }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dim + 1, self.slot + 1)
    }
}

/// Groups of positions that must carry equal node ids for an entry to be nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConstraintSet {
    groups: Vec<Vec<Position>>,
}

impl ConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(groups: Vec<Vec<Position>>) -> Result<Self> {
        let mut seen: HashMap<Position, usize> = HashMap::new();
        let mut groups = groups;
        for (g, group) in groups.iter_mut().enumerate() {
            group.sort_unstable();
            group.dedup();
            for (k, p) in group.iter().enumerate() {
                if let Some(prev) = seen.insert(*p, g) {
                    return Err(Error::InvalidSignature(format!(
                        "position {p} appears in constraint groups {} and {}",
                        prev + 1,
                        g + 1
                    )));
                }
                if group[..k].iter().any(|q| q.dim == p.dim) {
                    return Err(Error::InfeasibleConstraints(format!(
                        "group {} forces two positions of dimension {} to be equal",
                        g + 1,
                        p.dim + 1
                    )));
                }
            }
        }
        groups.retain(|g| g.len() > 1);
        Ok(ConstraintSet { groups })
    }

    pub fn groups(&self) -> &[Vec<Position>] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Face size and directedness of one tensor dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dim {
    pub face_size: usize,
    pub directed: bool,
}

impl Dim {
    pub fn new(face_size: usize, directed: bool) -> Self {
        Dim {
            face_size,
            directed,
        }
    }

    pub fn node() -> Self {
        Dim::new(1, false)
    }
}

/// The structural part of an incidence tensor: its dimensions and constraints.
/// Independent of the node count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSignature {
    dims: Vec<Dim>,
    constraints: ConstraintSet,
}

impl TensorSignature {
    pub fn new(dims: Vec<Dim>, constraints: ConstraintSet) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSignature("no dimensions".into()));
        }
        if let Some(d) = dims.iter().position(|d| d.face_size == 0) {
            return Err(Error::InvalidSignature(format!(
                "dimension {} has face size 0",
                d + 1
            )));
        }
        for p in constraints.groups.iter().flatten() {
            if p.dim >= dims.len() || p.slot >= dims[p.dim].face_size {
                return Err(Error::InvalidSignature(format!(
                    "constraint position {p} outside the tensor's dimensions"
                )));
            }
        }
        Ok(TensorSignature { dims, constraints })
    }

    /// `D` unconstrained node dimensions.
    pub fn nodes(order: usize) -> Result<Self> {
        Self::new(vec![Dim::node(); order], ConstraintSet::empty())
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// All positions in `(d, i)` lexicographic order.
    pub fn positions(&self) -> Vec<Position> {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(d, dim)| (0..dim.face_size).map(move |i| Position::new(d, i)))
            .collect()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.dims
            .iter()
            .map(|d| {
                let o = acc;
                acc += d.face_size;
                o
            })
            .collect()
    }

    pub fn face_spaces(&self, n_nodes: usize) -> Vec<FaceSpace> {
        self.dims
            .iter()
            .map(|d| FaceSpace::new(n_nodes, d.face_size, d.directed))
            .collect()
    }

    /// Number of face-index entries (channels excluded) at `n_nodes`.
    pub fn entry_count(&self, n_nodes: usize) -> usize {
        self.face_spaces(n_nodes)
            .iter()
            .map(FaceSpace::count)
            .product()
    }
}

/// A set-partition of a signature's node positions. Blocks are ordered by their
/// smallest position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<Vec<Position>>,
    labels: Vec<usize>,
}

impl SetPartition {
    fn from_labels(positions: &[Position], labels: Vec<usize>) -> Self {
        let n_blocks = labels.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (p, &l) in positions.iter().zip(&labels) {
            blocks[l].push(*p);
        }
        SetPartition { blocks, labels }
    }

    pub fn blocks(&self) -> &[Vec<Position>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Block label of each position, in position order (a restricted growth string).
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().join(",")))
            .join(",");
        write!(f, "{{{body}}}")
    }
}

/// Every set-partition of the signature's positions that keeps positions of one
/// face apart and each constraint group together, in lexicographic order of the
/// restricted growth strings.
pub fn enumerate_valid_partitions(signature: &TensorSignature) -> Result<Vec<SetPartition>> {
    let positions = signature.positions();
    let offsets = signature.offsets();
    let flat = |p: &Position| offsets[p.dim] + p.slot;

    // merge constraint groups into units; positions outside any group are singletons
    let mut unit_of: Vec<Option<usize>> = vec![None; positions.len()];
    let mut units: Vec<Vec<usize>> = Vec::new();
    for group in signature.constraints.groups() {
        let members: Vec<usize> = group.iter().map(flat).collect();
        for &m in &members {
            unit_of[m] = Some(units.len());
        }
        units.push(members);
    }
    for (i, u) in unit_of.iter_mut().enumerate() {
        if u.is_none() {
            *u = Some(units.len());
            units.push(vec![i]);
        }
    }
    for unit in &mut units {
        unit.sort_unstable();
        if unit
            .iter()
            .map(|&i| positions[i].dim)
            .duplicates()
            .next()
            .is_some()
        {
            return Err(Error::InfeasibleConstraints(format!(
                "positions {} of one face are forced equal",
                unit.iter().map(|&i| positions[i]).join(",")
            )));
        }
    }
    units.sort_by_key(|u| u[0]);
    let unit_dims: Vec<Vec<usize>> = units
        .iter()
        .map(|u| u.iter().map(|&i| positions[i].dim).collect())
        .collect();
    let conflict = |a: usize, b: usize| unit_dims[a].iter().any(|d| unit_dims[b].contains(d));

    let mut out = Vec::new();
    let mut assignment: Vec<usize> = Vec::with_capacity(units.len());
    let mut block_members: Vec<Vec<usize>> = Vec::new();
    fn recurse(
        u: usize,
        n_units: usize,
        assignment: &mut Vec<usize>,
        block_members: &mut Vec<Vec<usize>>,
        conflict: &dyn Fn(usize, usize) -> bool,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        if u == n_units {
            emit(assignment);
            return;
        }
        for b in 0..=block_members.len() {
            if b < block_members.len() {
                if block_members[b].iter().any(|&v| conflict(u, v)) {
                    continue;
                }
                block_members[b].push(u);
            } else {
                block_members.push(vec![u]);
            }
            assignment.push(b);
            recurse(u + 1, n_units, assignment, block_members, conflict, emit);
            assignment.pop();
            if b < block_members.len() - 1 || block_members[b].len() > 1 {
                block_members[b].pop();
            } else {
                block_members.pop();
            }
        }
    }
    let mut emit = |assign: &[usize]| {
        let mut labels = vec![0; positions.len()];
        for (u, unit) in units.iter().enumerate() {
            for &i in unit {
                labels[i] = assign[u];
            }
        }
        out.push(SetPartition::from_labels(&positions, labels));
    };
    recurse(
        0,
        units.len(),
        &mut assignment,
        &mut block_members,
        &conflict,
        &mut emit,
    );
    Ok(out)
}

/// Number of valid partitions with exactly `m` blocks: the multiplicity of the
/// size-`m` face-vector in the decomposition.
pub fn multiplicity(signature: &TensorSignature, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidSignature("multiplicity needs m >= 1".into()));
    }
    Ok(enumerate_valid_partitions(signature)?
        .iter()
        .filter(|p| p.block_count() == m)
        .count())
}

/// `(m, κ_m)` for every block count with nonzero multiplicity, ascending in `m`.
pub fn multiplicities(signature: &TensorSignature) -> Result<Vec<(usize, usize)>> {
    let counts = enumerate_valid_partitions(signature)?
        .iter()
        .map(SetPartition::block_count)
        .counts();
    let mut out: Vec<(usize, usize)> = counts.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// Per-entry 0/1 mask over the face-index grid of a tensor (channels excluded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(bits: Vec<bool>) -> Self {
        Mask { bits }
    }

    pub fn ones(len: usize) -> Self {
        Mask {
            bits: vec![true; len],
        }
    }

    pub fn zeros(len: usize) -> Self {
        Mask {
            bits: vec![false; len],
        }
    }

    /// Ones where any channel of the entry is nonzero.
    pub fn nonzero_of(tensor: &IncidenceTensor) -> Self {
        let c = tensor.channels;
        Mask {
            bits: tensor
                .values
                .chunks(c.max(1))
                .map(|ch| ch.iter().any(|&v| v != 0.0))
                .collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, entry: usize) -> bool {
        self.bits[entry]
    }

    pub fn and(&self, other: &Mask) -> Result<Mask> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch("mask lengths differ".into()));
        }
        Ok(Mask {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }
}

/// A dense incidence tensor over `[N]` with a trailing channel axis.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceTensor {
    n_nodes: usize,
    signature: TensorSignature,
    channels: usize,
    values: Vec<f64>,
}

impl IncidenceTensor {
    pub fn zeros(n_nodes: usize, signature: TensorSignature, channels: usize) -> Self {
        let len = signature.entry_count(n_nodes) * channels;
        IncidenceTensor {
            n_nodes,
            signature,
            channels,
            values: vec![0.0; len],
        }
    }

    /// Validates shape, finiteness and the constraint zero pattern.
    pub fn new(
        n_nodes: usize,
        signature: TensorSignature,
        channels: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let expected = signature.entry_count(n_nodes) * channels;
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "tensor needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let t = IncidenceTensor {
            n_nodes,
            signature,
            channels,
            values,
        };
        if !t.signature.constraints.is_empty() {
            let allowed = t.admissible_mask();
            for (e, ok) in allowed.bits.iter().enumerate() {
                let c = t.channels;
                if !ok && t.values[e * c..(e + 1) * c].iter().any(|&v| v != 0.0) {
                    return Err(Error::ShapeMismatch(format!(
                        "entry {:?} violates the constraints but is nonzero",
                        t.entry_faces(e)
                    )));
                }
            }
        }
        Ok(t)
    }

    /// Random integers in `lo..=hi` on every admissible entry, zero elsewhere.
    pub fn random_integers<R: Rng + ?Sized>(
        n_nodes: usize,
        signature: TensorSignature,
        channels: usize,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Self {
        let mut t = IncidenceTensor::zeros(n_nodes, signature, channels);
        let allowed = t.admissible_mask();
        for (e, ok) in allowed.bits.iter().enumerate() {
            if *ok {
                for c in 0..channels {
                    t.values[e * channels + c] = rng.random_range(lo..=hi) as f64;
                }
            }
        }
        t
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn signature(&self) -> &TensorSignature {
        &self.signature
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entry_count(&self) -> usize {
        self.signature.entry_count(self.n_nodes)
    }

    pub fn face_spaces(&self) -> Vec<FaceSpace> {
        self.signature.face_spaces(self.n_nodes)
    }

    fn strides(&self) -> Vec<usize> {
        strides(&self.face_spaces())
    }

    /// Flat entry index (channels excluded) of one face index per dimension.
    pub fn entry_index(&self, face_indices: &[usize]) -> usize {
        face_indices
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }

    /// Flat entry index of one face per dimension, given as node tuples.
    pub fn entry_of(&self, faces: &[Vec<NodeId>]) -> Result<usize> {
        let spaces = self.face_spaces();
        if faces.len() != spaces.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} faces per entry, got {}",
                spaces.len(),
                faces.len()
            )));
        }
        let idx = faces
            .iter()
            .zip(&spaces)
            .map(|(f, s)| s.index_of(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.entry_index(&idx))
    }

    /// Node tuples of the faces indexing an entry.
    pub fn entry_faces(&self, entry: usize) -> Vec<Vec<NodeId>> {
        let spaces = self.face_spaces();
        let strides = strides(&spaces);
        spaces
            .iter()
            .zip(strides)
            .map(|(s, st)| {
                s.face_at((entry / st) % s.count())
                    .map(Face::into_nodes)
                    .unwrap_or_default()
            })
            .collect()
    }

    pub fn get(&self, entry: usize, channel: usize) -> f64 {
        self.values[entry * self.channels + channel]
    }

    pub fn set(&mut self, entry: usize, channel: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(entry * self.channels + channel));
        }
        self.values[entry * self.channels + channel] = value;
        Ok(())
    }

    /// Ones on entries whose faces admit an ordering satisfying the constraints.
    pub fn admissible_mask(&self) -> Mask {
        if self.signature.constraints.is_empty() {
            return Mask::ones(self.entry_count());
        }
        CoverMap::build(self.n_nodes, &self.signature)
            .map(|c| c.admissible)
            .unwrap_or_else(|_| Mask::zeros(self.entry_count()))
    }

    /// Hadamard product with a per-entry mask, broadcast over channels.
    pub fn masked(&self, mask: &Mask) -> Result<IncidenceTensor> {
        if mask.len() != self.entry_count() {
            return Err(Error::ShapeMismatch(format!(
                "mask has {} entries, tensor has {}",
                mask.len(),
                self.entry_count()
            )));
        }
        let mut out = self.clone();
        let c = self.channels;
        for (e, &keep) in mask.bits.iter().enumerate() {
            if !keep {
                out.values[e * c..(e + 1) * c].fill(0.0);
            }
        }
        Ok(out)
    }

    /// Same values under a new constraint set (checked against the zero pattern).
    pub fn with_signature(self, signature: TensorSignature) -> Result<IncidenceTensor> {
        if signature.dims != self.signature.dims {
            return Err(Error::ShapeMismatch("dimensions differ".into()));
        }
        IncidenceTensor::new(self.n_nodes, signature, self.channels, self.values)
    }

    pub fn max_abs_diff(&self, other: &IncidenceTensor) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::ShapeMismatch("tensor shapes differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn from_raw(
        n_nodes: usize,
        signature: TensorSignature,
        channels: usize,
        values: Vec<f64>,
    ) -> Self {
        IncidenceTensor {
            n_nodes,
            signature,
            channels,
            values,
        }
    }
}

pub(crate) fn strides(spaces: &[FaceSpace]) -> Vec<usize> {
    strides_of(&spaces.iter().map(FaceSpace::count).collect::<Vec<_>>())
}

/// Row-major strides of a grid with the given extents.
pub(crate) fn strides_of(extents: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; extents.len()];
    for d in (0..extents.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * extents[d + 1];
    }
    strides
}

/// Calls `f` with every multi-index of the given extents, last axis fastest.
pub(crate) fn for_each_index(extents: &[usize], mut f: impl FnMut(&[usize])) {
    if extents.contains(&0) {
        return;
    }
    let mut idx = vec![0; extents.len()];
    loop {
        f(&idx);
        let mut d = extents.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < extents[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// `(π·X)[π·δ_1, .., π·δ_D] = X[δ_1, .., δ_D]`.
pub fn permute_tensor(t: &IncidenceTensor, perm: &Permutation) -> Result<IncidenceTensor> {
    if perm.n_nodes() != t.n_nodes {
        return Err(Error::InvalidPermutation(format!(
            "permutation on {} nodes applied to tensor on {}",
            perm.n_nodes(),
            t.n_nodes
        )));
    }
    let spaces = t.face_spaces();
    let maps: Vec<Vec<usize>> = spaces
        .iter()
        .map(|s| {
            s.tuples()
                .into_iter()
                .map(|f| {
                    let mut img = perm.apply_tuple(&f);
                    if !s.directed {
                        img.sort_unstable();
                    }
                    s.index_unchecked(&img)
                })
                .collect()
        })
        .collect();
    let st = strides(&spaces);
    let extents: Vec<usize> = spaces.iter().map(FaceSpace::count).collect();
    let c = t.channels;
    let mut values = vec![0.0; t.values.len()];
    let mut src = 0usize;
    for_each_index(&extents, |idx| {
        let dst: usize = idx
            .iter()
            .enumerate()
            .map(|(d, &i)| maps[d][i] * st[d])
            .sum();
        values[dst * c..(dst + 1) * c].copy_from_slice(&t.values[src * c..(src + 1) * c]);
        src += 1;
    });
    Ok(IncidenceTensor::from_raw(
        t.n_nodes,
        t.signature.clone(),
        c,
        values,
    ))
}

/// The correspondence between entries of the directed cover of a tensor and
/// entries of its orbit face-vectors.
#[derive(Debug, Clone)]
pub(crate) struct CoverMap {
    partitions: Vec<SetPartition>,
    /// `(tensor entry, partition, directed face index in that partition's space)`
    links: Vec<(usize, usize, usize)>,
    admissible: Mask,
}

impl CoverMap {
    pub(crate) fn build(n_nodes: usize, signature: &TensorSignature) -> Result<Self> {
        let partitions = enumerate_valid_partitions(signature)?;
        let lookup: HashMap<&[usize], usize> = partitions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.labels(), i))
            .collect();
        let part_spaces: Vec<FaceSpace> = partitions
            .iter()
            .map(|p| FaceSpace::new(n_nodes, p.block_count(), true))
            .collect();

        let spaces = signature.face_spaces(n_nodes);
        let directed: Vec<FaceSpace> = spaces
            .iter()
            .map(|s| FaceSpace::new(n_nodes, s.face_size, true))
            .collect();
        let dir_tuples: Vec<Vec<Vec<NodeId>>> = directed.iter().map(FaceSpace::tuples).collect();
        let st = strides(&spaces);
        let offsets = signature.offsets();
        let groups: Vec<Vec<usize>> = signature
            .constraints
            .groups()
            .iter()
            .map(|g| g.iter().map(|p| offsets[p.dim] + p.slot).collect())
            .collect();
        let n_pos: usize = signature.dims.iter().map(|d| d.face_size).sum();

        let mut links = Vec::new();
        let mut admissible = Mask::zeros(signature.entry_count(n_nodes));
        let mut nodes = vec![0 as NodeId; n_pos];
        let mut labels = vec![0usize; n_pos];
        let mut block_values: Vec<NodeId> = Vec::with_capacity(n_pos);
        let extents: Vec<usize> = directed.iter().map(FaceSpace::count).collect();
        for_each_index(&extents, |idx| {
            for (d, &i) in idx.iter().enumerate() {
                let t = &dir_tuples[d][i];
                nodes[offsets[d]..offsets[d] + t.len()].copy_from_slice(t);
            }
            if groups
                .iter()
                .any(|g| g.iter().any(|&p| nodes[p] != nodes[g[0]]))
            {
                return;
            }
            block_values.clear();
            for (p, &v) in nodes.iter().enumerate() {
                labels[p] = match block_values.iter().position(|&b| b == v) {
                    Some(l) => l,
                    None => {
                        block_values.push(v);
                        block_values.len() - 1
                    }
                };
            }
            let part = lookup[labels.as_slice()];
            let face = part_spaces[part].index_unchecked(&block_values);
            let mut entry = 0;
            for (d, &i) in idx.iter().enumerate() {
                let fi = if spaces[d].directed {
                    i
                } else {
                    let mut sorted = dir_tuples[d][i].clone();
                    sorted.sort_unstable();
                    spaces[d].index_unchecked(&sorted)
                };
                entry += fi * st[d];
            }
            admissible.bits[entry] = true;
            links.push((entry, part, face));
        });
        Ok(CoverMap {
            partitions,
            links,
            admissible,
        })
    }
}

/// One orbit of a decomposed tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPart {
    pub face_size: usize,
    /// 1-based copy index among the parts of equal face size.
    pub copy: usize,
    pub partition: SetPartition,
    pub vector: FaceVector,
}

/// A tensor split into directed face-vectors, ordered by face size and then by
/// canonical partition order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDecomposition {
    n_nodes: usize,
    signature: TensorSignature,
    channels: usize,
    parts: Vec<OrbitPart>,
}

impl OrbitDecomposition {
    pub fn parts(&self) -> &[OrbitPart] {
        &self.parts
    }

    pub fn parts_mut(&mut self) -> &mut [OrbitPart] {
        &mut self.parts
    }

    pub fn signature(&self) -> &TensorSignature {
        &self.signature
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn vectors(&self) -> Vec<FaceVector> {
        self.parts.iter().map(|p| p.vector.clone()).collect()
    }

    /// `(m, κ_m)` pairs, ascending in `m`.
    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for p in &self.parts {
            match out.last_mut() {
                Some((m, k)) if *m == p.face_size => *k += 1,
                _ => out.push((p.face_size, 1)),
            }
        }
        out
    }
}

/// Permutation taking canonical partition order to (face size, partition) order.
fn part_order(partitions: &[SetPartition]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..partitions.len()).collect();
    order.sort_by_key(|&i| (partitions[i].block_count(), i));
    order
}

pub fn decompose(t: &IncidenceTensor) -> Result<OrbitDecomposition> {
    let cover = CoverMap::build(t.n_nodes, &t.signature)?;
    let c = t.channels;
    let mut vectors: Vec<FaceVector> = cover
        .partitions
        .iter()
        .map(|p| FaceVector::zeros(FaceSpace::new(t.n_nodes, p.block_count(), true), c))
        .collect();
    for &(entry, part, face) in &cover.links {
        vectors[part].values[face * c..(face + 1) * c]
            .copy_from_slice(&t.values[entry * c..(entry + 1) * c]);
    }
    let mut parts = Vec::with_capacity(vectors.len());
    let mut vectors: Vec<Option<FaceVector>> = vectors.into_iter().map(Some).collect();
    let mut last = (0, 0);
    for i in part_order(&cover.partitions) {
        let m = cover.partitions[i].block_count();
        last = if last.0 == m { (m, last.1 + 1) } else { (m, 1) };
        parts.push(OrbitPart {
            face_size: m,
            copy: last.1,
            partition: cover.partitions[i].clone(),
            vector: vectors[i].take().expect("each partition visited once"),
        });
    }
    Ok(OrbitDecomposition {
        n_nodes: t.n_nodes,
        signature: t.signature.clone(),
        channels: c,
        parts,
    })
}

pub fn reassemble(d: &OrbitDecomposition) -> Result<IncidenceTensor> {
    let vectors: Vec<FaceVector> = d.parts.iter().map(|p| p.vector.clone()).collect();
    reassemble_vectors(d.n_nodes, &d.signature, &vectors)
}

/// Inverse of [`decompose`] given bare face-vectors in decomposition order.
///
/// An entry of an undirected dimension is read from every admissible ordering of
/// its faces; when those readings differ the entry takes their mean.
pub fn reassemble_vectors(
    n_nodes: usize,
    signature: &TensorSignature,
    vectors: &[FaceVector],
) -> Result<IncidenceTensor> {
    let cover = CoverMap::build(n_nodes, signature)?;
    if vectors.len() != cover.partitions.len() {
        return Err(Error::InconsistentDecomposition(format!(
            "expected {} parts, got {}",
            cover.partitions.len(),
            vectors.len()
        )));
    }
    let channels = vectors.first().map_or(1, FaceVector::channels);
    let order = part_order(&cover.partitions);
    // by_partition[i] is the vector for canonical partition i
    let mut by_partition: Vec<Option<&FaceVector>> = vec![None; vectors.len()];
    for (slot, &i) in order.iter().enumerate() {
        let v = &vectors[slot];
        let m = cover.partitions[i].block_count();
        if v.face_size() != m || !v.is_directed() || v.n_nodes() != n_nodes {
            return Err(Error::InconsistentDecomposition(format!(
                "part {} should be a directed size-{m} face-vector over {n_nodes} nodes",
                slot + 1
            )));
        }
        if v.channels() != channels {
            return Err(Error::InconsistentDecomposition(
                "parts disagree on channel count".into(),
            ));
        }
        by_partition[i] = Some(v);
    }

    let entries = signature.entry_count(n_nodes);
    let c = channels;
    let mut sum = vec![0.0; entries * c];
    let mut first = vec![0.0; entries * c];
    let mut count = vec![0usize; entries];
    let mut agree = vec![true; entries * c];
    for &(entry, part, face) in &cover.links {
        let v = by_partition[part].expect("all parts assigned");
        for ch in 0..c {
            let x = v.values[face * c + ch];
            let k = entry * c + ch;
            if count[entry] == 0 {
                first[k] = x;
            } else if x.to_bits() != first[k].to_bits() {
                agree[k] = false;
            }
            sum[k] += x;
        }
        count[entry] += 1;
    }
    let values = (0..entries * c)
        .map(|k| {
            let n = count[k / c];
            if n == 0 {
                0.0
            } else if agree[k] {
                first[k]
            } else {
                sum[k] / n as f64
            }
        })
        .collect();
    Ok(IncidenceTensor::from_raw(
        n_nodes,
        signature.clone(),
        c,
        values,
    ))
}

/// Dense tensor over all faces with an indicator mask on entries whose faces are
/// all present and that satisfy the constraints. Values equal the mask.
pub fn densify(
    faces_present: &[Vec<Face>],
    n_nodes: usize,
    signature: &TensorSignature,
) -> Result<(IncidenceTensor, Mask)> {
    let spaces = signature.face_spaces(n_nodes);
    if faces_present.len() != spaces.len() {
        return Err(Error::ShapeMismatch(format!(
            "expected a face list for each of {} dimensions, got {}",
            spaces.len(),
            faces_present.len()
        )));
    }
    let mut present: Vec<Vec<bool>> = spaces.iter().map(|s| vec![false; s.count()]).collect();
    for (d, (faces, space)) in faces_present.iter().zip(&spaces).enumerate() {
        for f in faces {
            if f.size() != space.face_size || f.is_directed() != space.directed {
                return Err(Error::InvalidFace {
                    face: f.nodes().to_vec(),
                    n_nodes,
                    reason: format!(
                        "dimension {} expects {} faces of size {}",
                        d + 1,
                        if space.directed {
                            "directed"
                        } else {
                            "undirected"
                        },
                        space.face_size
                    ),
                });
            }
            present[d][space.index_of(f.nodes())?] = true;
        }
    }
    let mut tensor = IncidenceTensor::zeros(n_nodes, signature.clone(), 1);
    let admissible = tensor.admissible_mask();
    let extents: Vec<usize> = spaces.iter().map(FaceSpace::count).collect();
    let mut bits = Vec::with_capacity(admissible.len());
    let mut e = 0;
    for_each_index(&extents, |idx| {
        let on = admissible.bits[e] && idx.iter().enumerate().all(|(d, &i)| present[d][i]);
        bits.push(on);
        e += 1;
    });
    for (e, &on) in bits.iter().enumerate() {
        if on {
            tensor.values[e] = 1.0;
        }
    }
    Ok((tensor, Mask { bits }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{bell, stirling};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node_edge() -> TensorSignature {
        TensorSignature::new(
            vec![Dim::node(), Dim::new(2, false)],
            ConstraintSet::new(vec![vec![Position::new(0, 0), Position::new(1, 0)]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn node_node_has_two_partitions() {
        let sig = TensorSignature::nodes(2).unwrap();
        let parts = enumerate_valid_partitions(&sig).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].to_string(), "{{(1,1),(2,1)}}");
        assert_eq!(parts[1].to_string(), "{{(1,1)},{(2,1)}}");
    }

    #[test]
    fn node_cube_multiplicities_are_stirling() {
        let sig = TensorSignature::nodes(3).unwrap();
        assert_eq!(enumerate_valid_partitions(&sig).unwrap().len(), 5);
        assert_eq!(multiplicities(&sig).unwrap(), vec![(1, 1), (2, 3), (3, 1)]);
        assert_eq!(multiplicity(&sig, 2).unwrap(), 3);
        assert_eq!(
            multiplicity(&TensorSignature::nodes(1).unwrap(), 1).unwrap(),
            1
        );
        assert_eq!(
            multiplicity(&TensorSignature::nodes(4).unwrap(), 2).unwrap(),
            7
        );
    }

    #[test]
    fn multiplicities_match_stirling_and_bell() {
        for d in 1..=5 {
            let sig = TensorSignature::nodes(d).unwrap();
            let all = enumerate_valid_partitions(&sig).unwrap();
            assert_eq!(all.len() as u64, bell(d).unwrap());
            for m in 1..=d {
                assert_eq!(
                    multiplicity(&sig, m).unwrap() as u64,
                    stirling(d, m).unwrap(),
                    "S({d},{m})"
                );
            }
        }
    }

    /// Brute-force count of partitions of the positions: every labeling of
    /// positions with block ids, filtered for validity and canonical form.
    fn brute_partitions(sig: &TensorSignature) -> Vec<Vec<usize>> {
        let pos = sig.positions();
        let n = pos.len();
        let mut out = Vec::new();
        for labels in (0..n).map(|_| 0..n).multi_cartesian_product() {
            // restricted growth: first occurrence order
            let mut next = 0;
            let rgs = labels.iter().all(|&l| {
                if l > next {
                    false
                } else {
                    if l == next {
                        next += 1;
                    }
                    true
                }
            });
            if !rgs {
                continue;
            }
            let apart =
                (0..n).all(|a| (0..a).all(|b| pos[a].dim != pos[b].dim || labels[a] != labels[b]));
            let together = sig.constraints().groups().iter().all(|g| {
                let i = |p: &Position| pos.iter().position(|q| q == p).unwrap();
                g.iter().all(|p| labels[i(p)] == labels[i(&g[0])])
            });
            if apart && together {
                out.push(labels);
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let sigs = vec![
            TensorSignature::nodes(4).unwrap(),
            node_edge(),
            TensorSignature::new(
                vec![Dim::new(2, false), Dim::new(2, false)],
                ConstraintSet::new(vec![vec![Position::new(0, 0), Position::new(1, 0)]]).unwrap(),
            )
            .unwrap(),
            TensorSignature::new(
                vec![Dim::new(2, true), Dim::node(), Dim::new(3, false)],
                ConstraintSet::empty(),
            )
            .unwrap(),
        ];
        for sig in sigs {
            let fast: Vec<Vec<usize>> = enumerate_valid_partitions(&sig)
                .unwrap()
                .iter()
                .map(|p| p.labels().to_vec())
                .collect();
            assert_eq!(fast, brute_partitions(&sig));
        }
    }

    #[test]
    fn node_edge_is_a_single_edge_orbit() {
        let parts = enumerate_valid_partitions(&node_edge()).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].block_count(), 2);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        let err = ConstraintSet::new(vec![vec![Position::new(1, 0), Position::new(1, 1)]]);
        assert!(matches!(err, Err(Error::InfeasibleConstraints(_))));
    }

    #[test]
    fn decomposes_node_node_into_diagonal_and_off_diagonal() {
        let sig = TensorSignature::nodes(2).unwrap();
        let values: Vec<f64> = (1..=9).map(f64::from).collect();
        let t = IncidenceTensor::new(3, sig, 1, values).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.multiplicities(), vec![(1, 1), (2, 1)]);
        assert_eq!(d.parts()[0].vector.values(), &[1.0, 5.0, 9.0]);
        // directed edges (1,2),(1,3),(2,1),(2,3),(3,1),(3,2) -> X[i][j]
        assert_eq!(
            d.parts()[1].vector.values(),
            &[2.0, 3.0, 4.0, 6.0, 7.0, 8.0]
        );
    }

    #[test]
    fn decomposes_node_cube() {
        let sig = TensorSignature::nodes(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = IncidenceTensor::random_integers(4, sig, 1, -9, 9, &mut rng);
        let d = decompose(&t).unwrap();
        assert_eq!(d.multiplicities(), vec![(1, 1), (2, 3), (3, 1)]);
        let main_diag: Vec<f64> = (0..4).map(|i| t.get(i * 16 + i * 4 + i, 0)).collect();
        assert_eq!(d.parts()[0].vector.values(), main_diag.as_slice());
        assert_eq!(d.parts()[4].vector.face_count(), 24);
        // total entries: 4 + 3*12 + 24 = 64
        let total: usize = d.parts().iter().map(|p| p.vector.face_count()).sum();
        assert_eq!(total, 64);
    }

    #[test]
    fn zero_tensor_decomposes_to_zeros() {
        let t = IncidenceTensor::zeros(4, node_edge(), 2);
        let d = decompose(&t).unwrap();
        assert!(d
            .parts()
            .iter()
            .all(|p| p.vector.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn node_edge_orbit_reads_both_edge_directions() {
        let mut t = IncidenceTensor::zeros(3, node_edge(), 1);
        // X[2, {1,2}] = 5 should appear at directed edge (2,1)
        let e = t.entry_of(&[vec![2], vec![1, 2]]).unwrap();
        t.set(e, 0, 5.0).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.parts()[0].vector.value_at(&[2, 1], 0).unwrap(), 5.0);
        assert_eq!(d.parts()[0].vector.value_at(&[1, 2], 0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_values_on_inadmissible_entries() {
        let mut values = vec![0.0; node_edge().entry_count(3)];
        // X[3, {1,2}] is not an incidence
        values[2 * 3] = 1.0;
        assert!(IncidenceTensor::new(3, node_edge(), 1, values).is_err());
    }

    #[test]
    fn reassembles_diagonal_from_parts() {
        let sig = TensorSignature::nodes(2).unwrap();
        let t = IncidenceTensor::zeros(3, sig, 1);
        let mut d = decompose(&t).unwrap();
        d.parts_mut()[0].vector =
            FaceVector::from_values(FaceSpace::new(3, 1, true), 1, vec![1.0, 2.0, 3.0]).unwrap();
        let back = reassemble(&d).unwrap();
        assert_eq!(
            back.values(),
            &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]
        );
    }

    #[test]
    fn zeroed_part_clears_exactly_its_orbit() {
        let sig = TensorSignature::nodes(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = IncidenceTensor::random_integers(4, sig, 1, 1, 9, &mut rng);
        let mut d = decompose(&t).unwrap();
        let zeroed = d.parts()[2].partition.clone();
        let space = d.parts()[2].vector.space();
        d.parts_mut()[2].vector = FaceVector::zeros(space, 1);
        let back = reassemble(&d).unwrap();
        for e in 0..back.entry_count() {
            let faces = back.entry_faces(e);
            let nodes: Vec<NodeId> = faces.iter().flatten().copied().collect();
            let on_orbit = zeroed.blocks().len() == nodes.iter().unique().count()
                && zeroed
                    .blocks()
                    .iter()
                    .all(|b| b.iter().map(|p| nodes[p.dim]).all_equal());
            if on_orbit {
                assert_eq!(back.get(e, 0), 0.0);
            } else {
                assert_eq!(back.get(e, 0), t.get(e, 0));
            }
        }
    }

    #[test]
    fn reassemble_rejects_wrong_part_count() {
        let sig = TensorSignature::nodes(2).unwrap();
        let v = FaceVector::zeros(FaceSpace::new(3, 1, true), 1);
        assert!(matches!(
            reassemble_vectors(3, &sig, &[v]),
            Err(Error::InconsistentDecomposition(_))
        ));
    }

    #[test]
    fn permutation_swaps_rows_and_columns() {
        let sig = TensorSignature::nodes(2).unwrap();
        let values: Vec<f64> = (1..=9).map(f64::from).collect();
        let t = IncidenceTensor::new(3, sig, 1, values).unwrap();
        let swap = Permutation::transposition(3, 1, 2).unwrap();
        let p = permute_tensor(&t, &swap).unwrap();
        assert_eq!(p.values(), &[5.0, 4.0, 6.0, 2.0, 1.0, 3.0, 8.0, 7.0, 9.0]);
        assert_eq!(permute_tensor(&p, &swap.inverse()).unwrap(), t);
        assert_eq!(permute_tensor(&t, &Permutation::identity(3)).unwrap(), t);
    }

    #[test]
    fn orbits_are_invariant_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sig in [node_edge(), TensorSignature::nodes(3).unwrap()] {
            let t = IncidenceTensor::random_integers(4, sig, 2, -5, 5, &mut rng);
            let perm = Permutation::random(4, &mut rng);
            let lhs = decompose(&permute_tensor(&t, &perm).unwrap()).unwrap();
            let rhs = decompose(&t).unwrap();
            for (a, b) in lhs.parts().iter().zip(rhs.parts()) {
                assert_eq!(a.partition, b.partition);
                assert_eq!(a.vector, b.vector.permute(&perm).unwrap());
            }
            let permuted = permute_tensor(&t, &perm).unwrap();
            assert!(
                IncidenceTensor::new(4, t.signature().clone(), 2, permuted.values().to_vec())
                    .is_ok()
            );
        }
    }

    #[test]
    fn densify_masks_present_faces() {
        let sig = TensorSignature::nodes(1).unwrap();
        let (t, mask) = densify(&[vec![]], 3, &sig).unwrap();
        assert_eq!(mask.count_ones(), 0);
        assert!(t.values().iter().all(|&v| v == 0.0));

        let all = FaceSpace::new(3, 1, false).faces();
        let (t, mask) = densify(&[all], 3, &sig).unwrap();
        assert_eq!(mask.count_ones(), 3);
        assert_eq!(t.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn densify_bipyramid_node_triangle() {
        let sig = TensorSignature::new(
            vec![Dim::node(), Dim::new(3, false)],
            ConstraintSet::new(vec![vec![Position::new(0, 0), Position::new(1, 0)]]).unwrap(),
        )
        .unwrap();
        let tri = |a, b, c| Face::undirected(vec![a, b, c], 5).unwrap();
        let triangles = vec![
            tri(1, 2, 3),
            tri(1, 2, 4),
            tri(1, 3, 4),
            tri(2, 3, 4),
            tri(1, 2, 5),
            tri(1, 3, 5),
            tri(2, 3, 5),
        ];
        let nodes = FaceSpace::new(5, 1, false).faces();
        let (t, mask) = densify(&[nodes, triangles], 5, &sig).unwrap();
        assert_eq!(t.face_spaces()[1].count(), 10);
        assert_eq!(mask.count_ones(), 21);
        let cols_with_ones = (0..10)
            .filter(|&j| (0..5).any(|i| mask.get(i * 10 + j)))
            .count();
        assert_eq!(cols_with_ones, 7);
    }
}
