//! Pool-and-broadcast terms, equivariant maps between face-vectors, layers over
//! incidence tensors and the parameter counting formulas.
//!
//! A term `(P, B)` between face sizes `M` and `M'` pools the positions `P` of a
//! directed size-`M` face-vector and places each surviving position `j` at
//! output position `B[j]`, broadcasting over the output positions not in `B`.
//! Positions in `P` and `B` are 1-based.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{binomial, falling_factorial, FaceSpace, NodeId};
use crate::tensors::{
    decompose, for_each_index, multiplicity, reassemble_vectors, strides, ConstraintSet,
    FaceVector, IncidenceTensor, Mask, TensorSignature,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    #[default]
    Sum,
    Mean,
    /// Not linear; excluded from the exactness guarantees.
    Max,
}

impl Aggregator {
    fn name(self) -> &'static str {
        match self {
            Aggregator::Sum => "sum",
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
        }
    }
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Aggregator::Sum),
            "mean" => Ok(Aggregator::Mean),
            "max" => Ok(Aggregator::Max),
            other => Err(Error::Format(format!("unknown aggregator {other:?}"))),
        }
    }
}

fn require_directed(x: &FaceVector, op: &str) -> Result<()> {
    if x.is_directed() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{op} needs a directed face-vector; take the directed cover first"
        )))
    }
}

/// Aggregates over the 1-based positions `pooled`, keeping the surviving
/// positions in their original order. Only injective completions contribute.
pub fn pool(x: &FaceVector, pooled: &[usize], agg: Aggregator) -> Result<FaceVector> {
    require_directed(x, "pool")?;
    let m = x.face_size();
    let mut is_pooled = vec![false; m];
    for &p in pooled {
        if p == 0 || p > m {
            return Err(Error::InvalidTerm(format!(
                "pooled position {p} outside 1..={m}"
            )));
        }
        if is_pooled[p - 1] {
            return Err(Error::InvalidTerm(format!("pooled position {p} repeated")));
        }
        is_pooled[p - 1] = true;
    }
    if pooled.is_empty() {
        return Ok(x.clone());
    }
    let n = x.n_nodes();
    let kept: Vec<usize> = (0..m).filter(|&i| !is_pooled[i]).collect();
    let out_space = FaceSpace::new(n, kept.len(), true);
    let c = x.channels();
    let completions = falling_factorial(n.saturating_sub(kept.len()), pooled.len());
    if completions == 0 && agg != Aggregator::Sum && out_space.count() > 0 {
        return Err(Error::EmptyAggregation(agg.name()));
    }
    let init = if agg == Aggregator::Max {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    let mut out = vec![init; out_space.count() * c];
    let mut surviving: Vec<NodeId> = Vec::with_capacity(kept.len());
    for (i, t) in x.space().tuples().into_iter().enumerate() {
        surviving.clear();
        surviving.extend(kept.iter().map(|&k| t[k]));
        let j = out_space.index_unchecked(&surviving);
        for ch in 0..c {
            let v = x.get(i, ch);
            let slot = &mut out[j * c + ch];
            match agg {
                Aggregator::Sum | Aggregator::Mean => *slot += v,
                Aggregator::Max => *slot = slot.max(v),
            }
        }
    }
    if agg == Aggregator::Mean {
        let k = completions as f64;
        out.iter_mut().for_each(|v| *v /= k);
    }
    if agg == Aggregator::Max && completions == 0 {
        out.fill(0.0);
    }
    FaceVector::from_values(out_space, c, out)
}

/// Broadcasts a directed size-`M` face-vector to size `target_size`, reading
/// input slot `j` from output position `placement[j]` (1-based).
pub fn broadcast(x: &FaceVector, placement: &[usize], target_size: usize) -> Result<FaceVector> {
    require_directed(x, "broadcast")?;
    if placement.len() != x.face_size() {
        return Err(Error::InvalidTerm(format!(
            "placement has {} entries for a size-{} face-vector",
            placement.len(),
            x.face_size()
        )));
    }
    validate_placement(placement, target_size)?;
    let out_space = FaceSpace::new(x.n_nodes(), target_size, true);
    let c = x.channels();
    let mut out = Vec::with_capacity(out_space.count() * c);
    let mut read: Vec<NodeId> = Vec::with_capacity(placement.len());
    for t in out_space.tuples() {
        read.clear();
        read.extend(placement.iter().map(|&b| t[b - 1]));
        let i = x.space().index_unchecked(&read);
        out.extend((0..c).map(|ch| x.get(i, ch)));
    }
    FaceVector::from_values(out_space, c, out)
}

fn validate_placement(placement: &[usize], target_size: usize) -> Result<()> {
    for (k, &b) in placement.iter().enumerate() {
        if b == 0 || b > target_size {
            return Err(Error::InvalidTerm(format!(
                "placement {b} outside 1..={target_size}"
            )));
        }
        if placement[..k].contains(&b) {
            return Err(Error::InvalidTerm(format!("placement {b} repeated")));
        }
    }
    Ok(())
}

/// One basis element `(P, B)` of the equivariant maps from size `M` to size `M'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoolBroadcastTerm {
    input_size: usize,
    output_size: usize,
    pooled: Vec<usize>,
    placement: Vec<usize>,
}

impl PoolBroadcastTerm {
    pub fn new(
        input_size: usize,
        output_size: usize,
        pooled: Vec<usize>,
        placement: Vec<usize>,
    ) -> Result<Self> {
        let mut pooled = pooled;
        pooled.sort_unstable();
        if pooled.iter().any(|&p| p == 0 || p > input_size)
            || pooled.iter().duplicates().next().is_some()
        {
            return Err(Error::InvalidTerm(format!(
                "pooled set {pooled:?} is not a subset of 1..={input_size}"
            )));
        }
        if placement.len() + pooled.len() != input_size {
            return Err(Error::InvalidTerm(format!(
                "|B| = {} but M - |P| = {}",
                placement.len(),
                input_size - pooled.len()
            )));
        }
        validate_placement(&placement, output_size)?;
        Ok(PoolBroadcastTerm {
            input_size,
            output_size,
            pooled,
            placement,
        })
    }

    /// The identity term of a size-`m` face-vector.
    pub fn identity(m: usize) -> Self {
        PoolBroadcastTerm {
            input_size: m,
            output_size: m,
            pooled: Vec::new(),
            placement: (1..=m).collect(),
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn pooled(&self) -> &[usize] {
        &self.pooled
    }

    pub fn placement(&self) -> &[usize] {
        &self.placement
    }

    /// Matched `(input position, output position)` pairs, 1-based, ascending in the input.
    pub fn matched_pairs(&self) -> Vec<(usize, usize)> {
        (1..=self.input_size)
            .filter(|j| !self.pooled.contains(j))
            .zip(self.placement.iter().copied())
            .collect()
    }

    /// Canonical id such as `P={1};B=(2)`.
    pub fn id(&self) -> String {
        format!(
            "P={{{}}};B=({})",
            self.pooled.iter().join(","),
            self.placement.iter().join(",")
        )
    }

    pub fn parse_id(id: &str, input_size: usize, output_size: usize) -> Result<Self> {
        let bad = || Error::Format(format!("malformed term id {id:?}"));
        let (p, b) = id.split_once(';').ok_or_else(bad)?;
        let p = p
            .trim()
            .strip_prefix("P={")
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(bad)?;
        let b = b
            .trim()
            .strip_prefix("B=(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(bad)?;
        let list = |s: &str| -> Result<Vec<usize>> {
            if s.trim().is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        PoolBroadcastTerm::new(input_size, output_size, list(p)?, list(b)?)
    }
}

impl fmt::Display for PoolBroadcastTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

pub fn apply_term(term: &PoolBroadcastTerm, x: &FaceVector, agg: Aggregator) -> Result<FaceVector> {
    if x.face_size() != term.input_size {
        return Err(Error::ShapeMismatch(format!(
            "term expects size-{} input, got size {}",
            term.input_size,
            x.face_size()
        )));
    }
    let pooled = pool(x, &term.pooled, agg)?;
    broadcast(&pooled, &term.placement, term.output_size)
}

/// Every term from size `M` to size `M'`, ordered by `|P|`, then `P`, then `B`.
pub fn enumerate_terms(input_size: usize, output_size: usize) -> Vec<PoolBroadcastTerm> {
    let mut out = Vec::new();
    for p_size in input_size.saturating_sub(output_size)..=input_size {
        for pooled in (1..=input_size).combinations(p_size) {
            for placement in (1..=output_size).permutations(input_size - p_size) {
                out.push(PoolBroadcastTerm {
                    input_size,
                    output_size,
                    pooled: pooled.clone(),
                    placement,
                });
            }
        }
    }
    out
}

/// Number of terms between face sizes `M` and `M'`.
pub fn tau(m_in: usize, m_out: usize) -> u64 {
    (0..=m_in.min(m_out))
        .map(|m| (binomial(m_in, m) * binomial(m_out, m) * falling_factorial(m, m)) as u64)
        .sum()
}

/// Number of free parameters when every term with the same matched count shares one weight.
pub fn tau_symmetric(m_in: usize, m_out: usize) -> u64 {
    m_in.min(m_out) as u64 + 1
}

/// Closed form of the symmetric count summed over all `m, m' ∈ [D]` with unit multiplicities.
pub fn counting_symmetric(d: usize) -> u64 {
    let d = d as u64;
    (2 * d * d * d + 9 * d * d + d) / 6
}

/// Parameter count of the relaxed layer on an order-`D` tensor, per channel pair.
pub fn relaxed_parameters(order: usize) -> u64 {
    1u64 << order
}

/// The orbit content of a layer's input or output: `(face size, copies)` pairs
/// ascending in face size, and a channel count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSignature {
    pub orbits: Vec<(usize, usize)>,
    pub channels: usize,
}

impl OrbitSignature {
    pub fn new(orbits: Vec<(usize, usize)>, channels: usize) -> Result<Self> {
        let mut orbits: Vec<(usize, usize)> = orbits.into_iter().filter(|o| o.1 > 0).collect();
        orbits.sort_unstable();
        if orbits.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidSignature(
                "face size listed twice in orbit signature".into(),
            ));
        }
        if channels == 0 {
            return Err(Error::InvalidSignature(
                "channel count must be positive".into(),
            ));
        }
        Ok(OrbitSignature { orbits, channels })
    }

    /// Orbit content of a tensor signature.
    pub fn of_tensor(signature: &TensorSignature, channels: usize) -> Result<Self> {
        Self::new(crate::tensors::multiplicities(signature)?, channels)
    }

    /// One `(face size, 1-based copy)` slot per orbit, in decomposition order.
    pub fn slots(&self) -> Vec<(usize, usize)> {
        self.orbits
            .iter()
            .flat_map(|&(m, copies)| (1..=copies).map(move |k| (m, k)))
            .collect()
    }
}

/// Per-`(m, m')` entries of a parameter count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub m_in: usize,
    pub m_out: usize,
    pub copies_in: usize,
    pub copies_out: usize,
    pub tau: u64,
    pub subtotal: u64,
}

pub fn parameter_breakdown(
    input: &OrbitSignature,
    output: &OrbitSignature,
    symmetric: bool,
) -> Vec<CountRow> {
    let per = if symmetric { tau_symmetric } else { tau };
    let channels = (input.channels * output.channels) as u64;
    input
        .orbits
        .iter()
        .cartesian_product(&output.orbits)
        .map(|(&(m, k), &(m2, k2))| {
            let t = per(m, m2);
            CountRow {
                m_in: m,
                m_out: m2,
                copies_in: k,
                copies_out: k2,
                tau: t,
                subtotal: t * (k * k2) as u64 * channels,
            }
        })
        .collect()
}

pub fn total_parameters(input: &OrbitSignature, output: &OrbitSignature, symmetric: bool) -> u64 {
    parameter_breakdown(input, output, symmetric)
        .iter()
        .map(|r| r.subtotal)
        .sum()
}

/// Both sides of the identity `Σ S(D,m) S(D,m') τ(m,m') = Bell(2D)`, with the
/// Stirling numbers read off partition enumeration of `D` node positions.
pub fn bell_identity_check(order: usize) -> Result<(u64, u64)> {
    if !(1..=6).contains(&order) {
        return Err(Error::Range(format!(
            "Bell identity check supports D in 1..=6, got {order}"
        )));
    }
    let sig = TensorSignature::nodes(order)?;
    let kappa = (1..=order)
        .map(|m| multiplicity(&sig, m).map(|k| k as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut lhs = 0;
    for (a, ka) in kappa.iter().enumerate() {
        for (b, kb) in kappa.iter().enumerate() {
            lhs += ka * kb * tau(a + 1, b + 1);
        }
    }
    Ok((lhs, crate::oracle::bell(2 * order)?))
}

/// Weights between one input orbit and one output orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct MapBlock {
    pub input_slot: (usize, usize),
    pub output_slot: (usize, usize),
    terms: Vec<PoolBroadcastTerm>,
    /// Row-major `terms × in-channels × out-channels`.
    weights: Vec<f64>,
}

impl MapBlock {
    /// Key such as `1,2->2,3` (copy, face size of the input, then of the output).
    pub fn key(&self) -> String {
        format!(
            "{},{}->{},{}",
            self.input_slot.1, self.input_slot.0, self.output_slot.1, self.output_slot.0
        )
    }

    pub fn terms(&self) -> &[PoolBroadcastTerm] {
        &self.terms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn parse_block_key(key: &str) -> Result<((usize, usize), (usize, usize))> {
    let bad = || Error::Format(format!("malformed block key {key:?}"));
    let (a, b) = key.split_once("->").ok_or_else(bad)?;
    let pair = |s: &str| -> Result<(usize, usize)> {
        let (k, m) = s.split_once(',').ok_or_else(bad)?;
        let k = k.trim().parse().map_err(|_| bad())?;
        let m = m.trim().parse().map_err(|_| bad())?;
        Ok((m, k))
    };
    Ok((pair(a)?, pair(b)?))
}

/// A linear map between sets of directed face-vectors, equivariant to node
/// permutations. Input copies act as extra input channels and output copies as
/// extra output channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivariantMap {
    input: OrbitSignature,
    output: OrbitSignature,
    symmetric: bool,
    blocks: Vec<MapBlock>,
}

impl EquivariantMap {
    pub fn zeros(input: OrbitSignature, output: OrbitSignature) -> Self {
        let (ci, co) = (input.channels, output.channels);
        let mut blocks = Vec::new();
        for o in output.slots() {
            for i in input.slots() {
                let terms = enumerate_terms(i.0, o.0);
                let weights = vec![0.0; terms.len() * ci * co];
                blocks.push(MapBlock {
                    input_slot: i,
                    output_slot: o,
                    terms,
                    weights,
                });
            }
        }
        EquivariantMap {
            input,
            output,
            symmetric: false,
            blocks,
        }
    }

    /// Weights drawn uniformly from `lo..=hi` as integers.
    pub fn random_integers<R: rand::Rng + ?Sized>(
        input: OrbitSignature,
        output: OrbitSignature,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Self {
        let mut map = Self::zeros(input, output);
        for b in &mut map.blocks {
            for w in &mut b.weights {
                *w = rng.random_range(lo..=hi) as f64;
            }
        }
        map
    }

    /// Identity on matching orbits and channels; requires equal signatures.
    pub fn identity(signature: OrbitSignature) -> Self {
        let c = signature.channels;
        let mut map = Self::zeros(signature.clone(), signature);
        for b in &mut map.blocks {
            if b.input_slot == b.output_slot {
                let id = PoolBroadcastTerm::identity(b.input_slot.0);
                let t = b
                    .terms
                    .iter()
                    .position(|t| *t == id)
                    .expect("identity term");
                for ch in 0..c {
                    b.weights[(t * c + ch) * c + ch] = 1.0;
                }
            }
        }
        map
    }

    pub fn input(&self) -> &OrbitSignature {
        &self.input
    }

    pub fn output(&self) -> &OrbitSignature {
        &self.output
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn blocks(&self) -> &[MapBlock] {
        &self.blocks
    }

    pub fn weight_count(&self) -> usize {
        self.blocks.iter().map(|b| b.weights.len()).sum()
    }

    fn block_index(
        &self,
        input_slot: (usize, usize),
        output_slot: (usize, usize),
    ) -> Result<usize> {
        self.blocks
            .iter()
            .position(|b| b.input_slot == input_slot && b.output_slot == output_slot)
            .ok_or_else(|| {
                Error::InvalidSignature(format!(
                    "no block for copy {} of size {} -> copy {} of size {}",
                    input_slot.1, input_slot.0, output_slot.1, output_slot.0
                ))
            })
    }

    pub fn block(&self, key: &str) -> Result<&MapBlock> {
        let (i, o) = parse_block_key(key)?;
        Ok(&self.blocks[self.block_index(i, o)?])
    }

    /// Sets the `in_channel → out_channel` weight of one term in the block `key`.
    pub fn set_weight(
        &mut self,
        key: &str,
        term_id: &str,
        in_channel: usize,
        out_channel: usize,
        value: f64,
    ) -> Result<()> {
        let (i, o) = parse_block_key(key)?;
        let b = self.block_index(i, o)?;
        let term = PoolBroadcastTerm::parse_id(term_id, i.0, o.0)?;
        let (ci, co) = (self.input.channels, self.output.channels);
        if in_channel >= ci || out_channel >= co {
            return Err(Error::ShapeMismatch(format!(
                "channel pair ({in_channel},{out_channel}) outside {ci}x{co}"
            )));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(0));
        }
        let block = &mut self.blocks[b];
        let t = block
            .terms
            .iter()
            .position(|x| *x == term)
            .expect("every valid term is enumerated");
        block.weights[(t * ci + in_channel) * co + out_channel] = value;
        self.symmetric = false;
        Ok(())
    }

    pub fn get_weight(
        &self,
        key: &str,
        term_id: &str,
        in_channel: usize,
        out_channel: usize,
    ) -> Result<f64> {
        let (i, o) = parse_block_key(key)?;
        let block = &self.blocks[self.block_index(i, o)?];
        let term = PoolBroadcastTerm::parse_id(term_id, i.0, o.0)?;
        let t = block
            .terms
            .iter()
            .position(|x| *x == term)
            .expect("enumerated");
        let (ci, co) = (self.input.channels, self.output.channels);
        if in_channel >= ci || out_channel >= co {
            return Err(Error::ShapeMismatch("channel out of range".into()));
        }
        Ok(block.weights[(t * ci + in_channel) * co + out_channel])
    }

    /// All weights of one block, row-major over terms, in-channels, out-channels.
    pub fn set_block_weights(&mut self, key: &str, weights: Vec<f64>) -> Result<()> {
        let (i, o) = parse_block_key(key)?;
        let b = self.block_index(i, o)?;
        if weights.len() != self.blocks[b].weights.len() {
            return Err(Error::ShapeMismatch(format!(
                "block {key} holds {} weights, got {}",
                self.blocks[b].weights.len(),
                weights.len()
            )));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        self.blocks[b].weights = weights;
        self.symmetric = false;
        Ok(())
    }
}

/// Applies the map to input face-vectors given in slot order.
pub fn apply_map(map: &EquivariantMap, inputs: &[FaceVector]) -> Result<Vec<FaceVector>> {
    apply_map_with(map, inputs, Aggregator::Sum)
}

pub fn apply_map_with(
    map: &EquivariantMap,
    inputs: &[FaceVector],
    agg: Aggregator,
) -> Result<Vec<FaceVector>> {
    let in_slots = map.input.slots();
    if inputs.len() != in_slots.len() {
        return Err(Error::ShapeMismatch(format!(
            "map expects {} input face-vectors, got {}",
            in_slots.len(),
            inputs.len()
        )));
    }
    let n = inputs.first().map(FaceVector::n_nodes).unwrap_or(0);
    let (ci, co) = (map.input.channels, map.output.channels);
    for (x, &(m, _)) in inputs.iter().zip(&in_slots) {
        if x.face_size() != m || x.channels() != ci || x.n_nodes() != n {
            return Err(Error::ShapeMismatch(format!(
                "input of face size {}, {} channels, {} nodes does not match orbit of size {m} with {ci} channels",
                x.face_size(),
                x.channels(),
                x.n_nodes()
            )));
        }
        require_directed(x, "apply_map")?;
    }
    let in_index: HashMap<(usize, usize), usize> =
        in_slots.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut outputs = Vec::new();
    for out_slot in map.output.slots() {
        let space = FaceSpace::new(n, out_slot.0, true);
        let mut acc = vec![0.0; space.count() * co];
        for block in map.blocks.iter().filter(|b| b.output_slot == out_slot) {
            let x = &inputs[in_index[&block.input_slot]];
            for (t, term) in block.terms.iter().enumerate() {
                let w = &block.weights[t * ci * co..(t + 1) * ci * co];
                if w.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let y = apply_term(term, x, agg)?;
                for (f, row) in acc.chunks_mut(co).enumerate() {
                    for c_in in 0..ci {
                        let v = y.get(f, c_in);
                        for (c_out, slot) in row.iter_mut().enumerate() {
                            *slot += w[c_in * co + c_out] * v;
                        }
                    }
                }
            }
        }
        outputs.push(FaceVector::from_values(space, co, acc)?);
    }
    Ok(outputs)
}

/// Ties the weights of every term with the same matched count inside each block
/// to their mean. Blocks that are already tied keep their exact values.
pub fn symmetrize_map(map: &EquivariantMap) -> EquivariantMap {
    let mut out = map.clone();
    let (ci, co) = (map.input.channels, map.output.channels);
    for block in &mut out.blocks {
        let groups = block
            .terms
            .iter()
            .enumerate()
            .into_group_map_by(|(_, t)| t.pooled.len());
        for members in groups.values() {
            for ch in 0..ci * co {
                let vals: Vec<f64> = members
                    .iter()
                    .map(|(t, _)| block.weights[t * ci * co + ch])
                    .collect();
                if vals.iter().all_equal() {
                    continue;
                }
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                for (t, _) in members {
                    block.weights[t * ci * co + ch] = mean;
                }
            }
        }
    }
    out.symmetric = true;
    out
}

/// Number of distinct weight values needed by a tied map: `τ_sym` per block and channel pair.
pub fn symmetric_parameter_count(map: &EquivariantMap) -> u64 {
    let per_pair = (map.input.channels * map.output.channels) as u64;
    map.blocks
        .iter()
        .map(|b| tau_symmetric(b.input_slot.0, b.output_slot.0) * per_pair)
        .sum()
}

/// `apply_map` followed by an entrywise mask on each output face-vector.
pub fn apply_masked(
    map: &EquivariantMap,
    inputs: &[FaceVector],
    masks: &[Mask],
) -> Result<Vec<FaceVector>> {
    let mut out = apply_map(map, inputs)?;
    if masks.len() != out.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} masks for {} outputs",
            masks.len(),
            out.len()
        )));
    }
    for (y, mask) in out.iter_mut().zip(masks) {
        if mask.len() != y.face_count() {
            return Err(Error::ShapeMismatch(format!(
                "mask of {} entries for a face-vector of {} faces",
                mask.len(),
                y.face_count()
            )));
        }
        let c = y.channels();
        for (f, &keep) in mask.bits().iter().enumerate() {
            if !keep {
                y.values_mut()[f * c..(f + 1) * c].fill(0.0);
            }
        }
    }
    Ok(out)
}

/// An equivariant map between two incidence tensor signatures, applied through
/// orbit decomposition and reassembly.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorLayer {
    pub input: TensorSignature,
    pub output: TensorSignature,
    pub map: EquivariantMap,
}

impl TensorLayer {
    pub fn new(
        input: TensorSignature,
        output: TensorSignature,
        map: EquivariantMap,
    ) -> Result<Self> {
        let expect_in = OrbitSignature::of_tensor(&input, map.input.channels)?;
        let expect_out = OrbitSignature::of_tensor(&output, map.output.channels)?;
        if expect_in != map.input || expect_out != map.output {
            return Err(Error::InvalidSignature(format!(
                "map orbits {:?} -> {:?} do not match tensor orbits {:?} -> {:?}",
                map.input.orbits, map.output.orbits, expect_in.orbits, expect_out.orbits
            )));
        }
        Ok(TensorLayer { input, output, map })
    }

    pub fn zeros(
        input: TensorSignature,
        output: TensorSignature,
        cin: usize,
        cout: usize,
    ) -> Result<Self> {
        let map = EquivariantMap::zeros(
            OrbitSignature::of_tensor(&input, cin)?,
            OrbitSignature::of_tensor(&output, cout)?,
        );
        Ok(TensorLayer { input, output, map })
    }

    pub fn apply(&self, t: &IncidenceTensor) -> Result<IncidenceTensor> {
        self.apply_with(t, Aggregator::Sum)
    }

    pub fn apply_with(&self, t: &IncidenceTensor, agg: Aggregator) -> Result<IncidenceTensor> {
        if t.signature() != &self.input {
            return Err(Error::ShapeMismatch(
                "tensor signature differs from the layer's input signature".into(),
            ));
        }
        let parts = decompose(t)?.vectors();
        let out = apply_map_with(&self.map, &parts, agg)?;
        reassemble_vectors(t.n_nodes(), &self.output, &out)
    }

    /// The layer output multiplied entrywise by `mask`.
    pub fn apply_masked(&self, t: &IncidenceTensor, mask: &Mask) -> Result<IncidenceTensor> {
        self.apply(t)?.masked(mask)
    }
}

/// Output entry sets for the relaxed layer: each subset of dimensions is pooled
/// as whole axes and broadcast back. Weight layout is `2^D × cin × cout`, with
/// subset `s` pooling dimension `d` when bit `d` of `s` is set.
pub fn apply_relaxed(
    t: &IncidenceTensor,
    weights: &[f64],
    cout: usize,
    agg: Aggregator,
) -> Result<IncidenceTensor> {
    let order = t.signature().order();
    let cin = t.channels();
    let n_subsets = 1usize << order;
    if weights.len() != n_subsets * cin * cout {
        return Err(Error::ShapeMismatch(format!(
            "relaxed layer on order {order} with {cin}->{cout} channels needs {} weights, got {}",
            n_subsets * cin * cout,
            weights.len()
        )));
    }
    if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    let spaces = t.face_spaces();
    let extents: Vec<usize> = spaces.iter().map(FaceSpace::count).collect();
    let st = strides(&spaces);
    let entries = t.entry_count();
    let mut out = vec![0.0; entries * cout];
    for s in 0..n_subsets {
        let w = &weights[s * cin * cout..(s + 1) * cin * cout];
        if w.iter().all(|&v| v == 0.0) {
            continue;
        }
        let kept_ext: Vec<usize> = extents
            .iter()
            .enumerate()
            .map(|(d, &e)| if s >> d & 1 == 1 { 1 } else { e })
            .collect();
        let pooled_size: usize = (0..order)
            .filter(|d| s >> d & 1 == 1)
            .map(|d| extents[d])
            .product();
        if pooled_size == 0 && agg != Aggregator::Sum {
            return Err(Error::EmptyAggregation(agg.name()));
        }
        let kept_st = crate::tensors::strides_of(&kept_ext);
        let reduced_len: usize = kept_ext.iter().product();
        let init = if agg == Aggregator::Max {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        let mut reduced = vec![init; reduced_len * cin];
        let mut e = 0;
        for_each_index(&extents, |idx| {
            let r: usize = idx
                .iter()
                .enumerate()
                .map(|(d, &i)| if s >> d & 1 == 1 { 0 } else { i * kept_st[d] })
                .sum();
            for c in 0..cin {
                let v = t.get(e, c);
                let slot = &mut reduced[r * cin + c];
                match agg {
                    Aggregator::Max => *slot = slot.max(v),
                    _ => *slot += v,
                }
            }
            e += 1;
        });
        if agg == Aggregator::Mean {
            reduced.iter_mut().for_each(|v| *v /= pooled_size as f64);
        }
        let mut e = 0;
        for_each_index(&extents, |idx| {
            debug_assert_eq!(idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>(), e);
            let r: usize = idx
                .iter()
                .enumerate()
                .map(|(d, &i)| if s >> d & 1 == 1 { 0 } else { i * kept_st[d] })
                .sum();
            for c_in in 0..cin {
                let v = reduced[r * cin + c_in];
                for c_out in 0..cout {
                    out[e * cout + c_out] += w[c_in * cout + c_out] * v;
                }
            }
            e += 1;
        });
    }
    let sig = TensorSignature::new(t.signature().dims().to_vec(), ConstraintSet::empty())?;
    IncidenceTensor::new(t.n_nodes(), sig, cout, out)
}

/// Relaxed layer restricted to the nonzero pattern of the input, keeping the
/// input's constraint set on the output.
pub fn apply_relaxed_masked(
    t: &IncidenceTensor,
    weights: &[f64],
    cout: usize,
    agg: Aggregator,
) -> Result<IncidenceTensor> {
    let mask = Mask::nonzero_of(t);
    let dense = apply_relaxed(t, weights, cout, agg)?.masked(&mask)?;
    dense.with_signature(t.signature().clone())
}
