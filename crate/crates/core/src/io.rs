//! JSON file formats and the compact signature grammar.
//!
//! Node ids and `(dimension, slot)` positions are 1-based in every format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equimap::{EquivariantMap, OrbitSignature, PoolBroadcastTerm};
use crate::error::{Error, Result};
use crate::faces::{Face, NodeId};
use crate::geometry::{closure, GradedPoset, PosetElement, SimplicialComplex};
use crate::tensors::{ConstraintSet, Dim, IncidenceTensor, Mask, Position, TensorSignature};

/// Parses signatures such as `node,edge|c:1=2:1`.
///
/// Dimensions are comma-separated: `node`, `edge`, `triangle`, `tetra` or a
/// bare face size, each optionally suffixed with `d` for directed faces. Each
/// following `|c:` clause lists positions that must hold equal nodes, joined by
/// `=`; a position is `dim` or `dim:slot` (slot defaults to 1).
pub fn parse_signature(text: &str) -> Result<TensorSignature> {
    let bad = |msg: String| Error::InvalidSignature(msg);
    let mut sections = text.split('|');
    let dims_text = sections.next().unwrap_or_default().trim();
    if dims_text.is_empty() {
        return Err(bad("no dimensions given".into()));
    }
    let dims = dims_text
        .split(',')
        .map(|tok| {
            let tok = tok.trim().to_ascii_lowercase();
            let (base, directed) = match tok.strip_suffix('d') {
                Some(b) => (b, true),
                None => (tok.as_str(), false),
            };
            let size = match base {
                "node" => 1,
                "edge" => 2,
                "triangle" => 3,
                "tetra" => 4,
                other => other
                    .parse::<usize>()
                    .map_err(|_| bad(format!("unknown dimension {tok:?}")))?,
            };
            Ok(Dim::new(size, directed))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut groups = Vec::new();
    for clause in sections {
        let body = clause
            .trim()
            .strip_prefix("c:")
            .ok_or_else(|| bad(format!("constraint clause {clause:?} must start with c:")))?;
        let group = body
            .split('=')
            .map(|pos| {
                let mut it = pos.trim().split(':');
                let num = |s: Option<&str>, default: Option<usize>| -> Result<usize> {
                    match s {
                        Some(s) => s
                            .trim()
                            .parse::<usize>()
                            .ok()
                            .filter(|&v| v >= 1)
                            .ok_or_else(|| bad(format!("bad position {pos:?}"))),
                        None => default.ok_or_else(|| bad(format!("bad position {pos:?}"))),
                    }
                };
                let d = num(it.next(), None)?;
                let i = num(it.next(), Some(1))?;
                if it.next().is_some() {
                    return Err(bad(format!("bad position {pos:?}")));
                }
                Ok(Position::new(d - 1, i - 1))
            })
            .collect::<Result<Vec<_>>>()?;
        if group.len() < 2 {
            return Err(bad(format!("constraint {clause:?} needs two positions")));
        }
        groups.push(group);
    }
    TensorSignature::new(dims, ConstraintSet::new(groups)?)
}

/// Inverse of [`parse_signature`], using numeric sizes.
pub fn format_signature(sig: &TensorSignature) -> String {
    let mut out = sig
        .dims()
        .iter()
        .map(|d| format!("{}{}", d.face_size, if d.directed { "d" } else { "" }))
        .collect::<Vec<_>>()
        .join(",");
    for g in sig.constraints().groups() {
        out.push_str("|c:");
        out.push_str(
            &g.iter()
                .map(|p| format!("{}:{}", p.dim + 1, p.slot + 1))
                .collect::<Vec<_>>()
                .join("="),
        );
    }
    out
}

fn constraints_to_json(c: &ConstraintSet) -> Vec<Vec<[usize; 2]>> {
    c.groups()
        .iter()
        .map(|g| g.iter().map(|p| [p.dim + 1, p.slot + 1]).collect())
        .collect()
}

fn constraints_from_json(groups: &[Vec<[usize; 2]>]) -> Result<ConstraintSet> {
    let groups = groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&[d, i]| {
                    if d == 0 || i == 0 {
                        Err(Error::Format("constraint positions are 1-based".into()))
                    } else {
                        Ok(Position::new(d - 1, i - 1))
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ConstraintSet::new(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub faces: Vec<Vec<NodeId>>,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub n_nodes: usize,
    pub dims: Vec<Dim>,
    #[serde(default)]
    pub constraints: Vec<Vec<[usize; 2]>>,
    #[serde(default = "one")]
    pub channels: usize,
    #[serde(default)]
    pub entries: Vec<EntryJson>,
}

fn one() -> usize {
    1
}

/// Sparse JSON form listing entries with a nonzero channel, in canonical order.
pub fn tensor_to_json(t: &IncidenceTensor) -> TensorJson {
    let c = t.channels();
    let entries = (0..t.entry_count())
        .filter_map(|e| {
            let value: Vec<f64> = (0..c).map(|ch| t.get(e, ch)).collect();
            value.iter().any(|&v| v != 0.0).then(|| EntryJson {
                faces: t.entry_faces(e),
                value,
            })
        })
        .collect();
    TensorJson {
        n_nodes: t.n_nodes(),
        dims: t.signature().dims().to_vec(),
        constraints: constraints_to_json(t.signature().constraints()),
        channels: c,
        entries,
    }
}

pub fn tensor_from_json(j: &TensorJson) -> Result<IncidenceTensor> {
    let sig = TensorSignature::new(j.dims.clone(), constraints_from_json(&j.constraints)?)?;
    let mut t = IncidenceTensor::zeros(j.n_nodes, sig.clone(), j.channels);
    let mut seen = vec![false; t.entry_count()];
    let mut values = vec![0.0; t.entry_count() * j.channels];
    for entry in &j.entries {
        if entry.value.len() != j.channels {
            return Err(Error::Format(format!(
                "entry {:?} has {} values for {} channels",
                entry.faces,
                entry.value.len(),
                j.channels
            )));
        }
        let e = t.entry_of(&entry.faces)?;
        if std::mem::replace(&mut seen[e], true) {
            return Err(Error::Format(format!(
                "entry {:?} listed twice",
                entry.faces
            )));
        }
        values[e * j.channels..(e + 1) * j.channels].copy_from_slice(&entry.value);
    }
    t = IncidenceTensor::new(j.n_nodes, sig, j.channels, values)?;
    Ok(t)
}

pub fn tensor_to_string(t: &IncidenceTensor) -> String {
    serde_json::to_string_pretty(&tensor_to_json(t)).expect("tensor JSON serializes")
}

pub fn tensor_from_str(text: &str) -> Result<IncidenceTensor> {
    let j: TensorJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    tensor_from_json(&j)
}

/// Ones wherever a tensor file lists a nonzero entry.
pub fn mask_from_tensor(t: &IncidenceTensor) -> Mask {
    Mask::nonzero_of(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitJson {
    pub m: usize,
    pub copies: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSideJson {
    pub orbits: Vec<OrbitJson>,
    pub channels: usize,
    /// Optional tensor signature this side decomposes from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<Dim>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<Vec<[usize; 2]>>>,
}

impl LayerSideJson {
    fn orbit_signature(&self) -> Result<OrbitSignature> {
        OrbitSignature::new(
            self.orbits.iter().map(|o| (o.m, o.copies)).collect(),
            self.channels,
        )
    }

    /// The tensor signature, when the side names one.
    pub fn tensor_signature(&self) -> Result<Option<TensorSignature>> {
        match &self.dims {
            None => Ok(None),
            Some(dims) => Ok(Some(TensorSignature::new(
                dims.clone(),
                constraints_from_json(self.constraints.as_deref().unwrap_or_default())?,
            )?)),
        }
    }

    fn from_signature(sig: &OrbitSignature, tensor: Option<&TensorSignature>) -> Self {
        LayerSideJson {
            orbits: sig
                .orbits
                .iter()
                .map(|&(m, copies)| OrbitJson { m, copies })
                .collect(),
            channels: sig.channels,
            dims: tensor.map(|t| t.dims().to_vec()),
            constraints: tensor.map(|t| constraints_to_json(t.constraints())),
        }
    }
}

pub type WeightsJson = BTreeMap<String, BTreeMap<String, Vec<Vec<f64>>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerJson {
    pub input: LayerSideJson,
    pub output: LayerSideJson,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub weights: WeightsJson,
}

/// A parsed layer file: the map plus any tensor signatures it names.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerFile {
    pub map: EquivariantMap,
    pub input_signature: Option<TensorSignature>,
    pub output_signature: Option<TensorSignature>,
}

/// Builds the map; blocks and terms absent from `weights` are zero.
pub fn layer_from_json(j: &LayerJson) -> Result<LayerFile> {
    let input = j.input.orbit_signature()?;
    let output = j.output.orbit_signature()?;
    let (ci, co) = (input.channels, output.channels);
    let mut map = EquivariantMap::zeros(input, output);
    for (key, terms) in &j.weights {
        let block = map.block(key)?;
        let (m_in, m_out) = (block.input_slot.0, block.output_slot.0);
        for (term_id, matrix) in terms {
            PoolBroadcastTerm::parse_id(term_id, m_in, m_out)?;
            if matrix.len() != ci || matrix.iter().any(|r| r.len() != co) {
                return Err(Error::Format(format!(
                    "weights {key} / {term_id} must be a {ci}x{co} matrix"
                )));
            }
            for (a, row) in matrix.iter().enumerate() {
                for (b, &w) in row.iter().enumerate() {
                    map.set_weight(key, term_id, a, b, w)?;
                }
            }
        }
    }
    if j.symmetric {
        map = crate::equimap::symmetrize_map(&map);
    }
    Ok(LayerFile {
        map,
        input_signature: j.input.tensor_signature()?,
        output_signature: j.output.tensor_signature()?,
    })
}

/// Serializes every weight, zero or not.
pub fn layer_to_json(
    map: &EquivariantMap,
    input_signature: Option<&TensorSignature>,
    output_signature: Option<&TensorSignature>,
) -> LayerJson {
    let (ci, co) = (map.input().channels, map.output().channels);
    let mut weights = WeightsJson::new();
    for block in map.blocks() {
        let entry = weights.entry(block.key()).or_default();
        for (t, term) in block.terms().iter().enumerate() {
            let m = (0..ci)
                .map(|a| {
                    (0..co)
                        .map(|b| block.weights()[(t * ci + a) * co + b])
                        .collect()
                })
                .collect();
            entry.insert(term.id(), m);
        }
    }
    LayerJson {
        input: LayerSideJson::from_signature(map.input(), input_signature),
        output: LayerSideJson::from_signature(map.output(), output_signature),
        symmetric: map.is_symmetric(),
        weights,
    }
}

pub fn layer_from_str(text: &str) -> Result<LayerFile> {
    let j: LayerJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    layer_from_json(&j)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub n_nodes: usize,
    pub facets: Vec<Vec<NodeId>>,
    #[serde(default)]
    pub directed: bool,
}

pub fn complex_from_str(text: &str) -> Result<SimplicialComplex> {
    let j: ComplexJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let facets = j
        .facets
        .iter()
        .map(|f| Face::new(f.clone(), j.directed, j.n_nodes))
        .collect::<Result<Vec<_>>>()?;
    closure(&facets, j.n_nodes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetJson {
    pub elements: Vec<PosetElement>,
    #[serde(default)]
    pub covers: Vec<[i64; 2]>,
}

pub fn poset_from_str(text: &str) -> Result<GradedPoset> {
    let j: PosetJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let covers: Vec<(i64, i64)> = j.covers.iter().map(|&[a, b]| (a, b)).collect();
    GradedPoset::new(j.elements, &covers)
}
