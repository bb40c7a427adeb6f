//! Python bindings for the `incidence` crate.
//!
//! Signatures are passed as strings in the same grammar the command line uses
//! (`"node,edge|c:1=2:1"`). Tensors cross the boundary as flat value lists in
//! canonical entry order, or as the JSON documents `apply` reads and writes.

use incidence::algebra::two_layer_span_check;
use incidence::equimap::{apply_relaxed, counting_symmetric, relaxed_parameters};
use incidence::faces::{enumerate_faces, face_to_index, index_to_face};
use incidence::geometry::{incidence_from_complex, incidence_from_poset, validate_poset};
use incidence::io::{
    complex_from_str, format_signature, layer_from_str, layer_to_json, parse_signature,
    poset_from_str, tensor_from_str, tensor_to_string,
};
use incidence::oracle::{bell, sharing_pattern, verify_case};
use incidence::tensors::multiplicities;
use incidence::{
    apply_map, decompose, enumerate_terms, enumerate_valid_partitions, permute_tensor, reassemble,
    tau, tau_symmetric, total_parameters, Aggregator, EquivariantMap, Face, FaceIndex, FaceSpace,
    FaceVector, IncidenceTensor, Mask, OrbitSignature, Permutation, TensorLayer, TensorSignature,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(incidence_py, IncidenceError, PyValueError);

fn err(e: incidence::Error) -> PyErr {
    IncidenceError::new_err(e.to_string())
}

fn sig(text: &str) -> PyResult<TensorSignature> {
    parse_signature(text).map_err(err)
}

fn agg(name: &str) -> PyResult<Aggregator> {
    name.parse().map_err(err)
}

fn perm(images: Vec<u32>) -> PyResult<Permutation> {
    Permutation::from_images(images).map_err(err)
}

/// A dense incidence tensor with a trailing channel axis.
#[pyclass(name = "IncidenceTensor", module = "incidence_py", from_py_object)]
#[derive(Clone)]
struct PyTensor {
    inner: IncidenceTensor,
}

#[pymethods]
impl PyTensor {
    /// Builds a tensor from flat values (entry-major, channels last); zeros when omitted.
    #[new]
    #[pyo3(signature = (signature, n_nodes, channels=1, values=None))]
    fn new(signature: &str, n_nodes: usize, channels: usize, values: Option<Vec<f64>>) -> PyResult<Self> {
        let s = sig(signature)?;
        let inner = match values {
            None => IncidenceTensor::zeros(n_nodes, s, channels),
            Some(v) => IncidenceTensor::new(n_nodes, s, channels, v).map_err(err)?,
        };
        Ok(PyTensor { inner })
    }

    /// Seeded random integers in `[-bound, bound]` on admissible entries.
    #[staticmethod]
    #[pyo3(signature = (signature, n_nodes, channels=1, seed=0, bound=9))]
    fn random(signature: &str, n_nodes: usize, channels: usize, seed: u64, bound: i64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PyTensor {
            inner: IncidenceTensor::random_integers(n_nodes, sig(signature)?, channels, -bound, bound, &mut rng),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyTensor { inner: tensor_from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        tensor_to_string(&self.inner)
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    #[getter]
    fn signature(&self) -> String {
        format_signature(self.inner.signature())
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn entry_count(&self) -> usize {
        self.inner.entry_count()
    }

    fn entry_faces(&self, entry: usize) -> PyResult<Vec<Vec<u32>>> {
        if entry >= self.inner.entry_count() {
            return Err(IncidenceError::new_err(format!("entry {entry} out of range")));
        }
        Ok(self.inner.entry_faces(entry))
    }

    /// Value at the entry addressed by one node tuple per dimension.
    #[pyo3(signature = (faces, channel=0))]
    fn get(&self, faces: Vec<Vec<u32>>, channel: usize) -> PyResult<f64> {
        let e = self.inner.entry_of(&faces).map_err(err)?;
        Ok(self.inner.get(e, channel))
    }

    #[pyo3(signature = (faces, value, channel=0))]
    fn set(&mut self, faces: Vec<Vec<u32>>, value: f64, channel: usize) -> PyResult<()> {
        let e = self.inner.entry_of(&faces).map_err(err)?;
        self.inner.set(e, channel, value).map_err(err)
    }

    /// Relabels nodes: node `i` becomes `images[i-1]`.
    fn permute(&self, images: Vec<u32>) -> PyResult<Self> {
        Ok(PyTensor { inner: permute_tensor(&self.inner, &perm(images)?).map_err(err)? })
    }

    /// Directed face-vectors of the orbit decomposition, by face size.
    fn decompose(&self) -> PyResult<Vec<PyFaceVector>> {
        let d = decompose(&self.inner).map_err(err)?;
        Ok(d.vectors().into_iter().map(|inner| PyFaceVector { inner }).collect())
    }

    /// Decomposes and reassembles; equal to `self` for valid tensors.
    fn round_trip(&self) -> PyResult<Self> {
        let d = decompose(&self.inner).map_err(err)?;
        Ok(PyTensor { inner: reassemble(&d).map_err(err)? })
    }

    /// Positions holding a nonzero value in some channel.
    fn nonzero_mask(&self) -> Vec<bool> {
        Mask::nonzero_of(&self.inner).bits().to_vec()
    }

    fn max_abs_diff(&self, other: &PyTensor) -> PyResult<f64> {
        self.inner.max_abs_diff(&other.inner).map_err(err)
    }

    fn __eq__(&self, other: &PyTensor) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "IncidenceTensor('{}', n_nodes={}, channels={})",
            self.signature(),
            self.inner.n_nodes(),
            self.inner.channels()
        )
    }
}

/// Values on every directed face of one size.
#[pyclass(name = "FaceVector", module = "incidence_py", from_py_object)]
#[derive(Clone)]
struct PyFaceVector {
    inner: FaceVector,
}

#[pymethods]
impl PyFaceVector {
    #[new]
    #[pyo3(signature = (n_nodes, face_size, values, channels=1))]
    fn new(n_nodes: usize, face_size: usize, values: Vec<f64>, channels: usize) -> PyResult<Self> {
        let space = FaceSpace::new(n_nodes, face_size, true);
        Ok(PyFaceVector { inner: FaceVector::from_values(space, channels, values).map_err(err)? })
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn face_size(&self) -> usize {
        self.inner.face_size()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn permute(&self, images: Vec<u32>) -> PyResult<Self> {
        Ok(PyFaceVector { inner: self.inner.permute(&perm(images)?).map_err(err)? })
    }

    fn __eq__(&self, other: &PyFaceVector) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "FaceVector(n_nodes={}, face_size={}, channels={})",
            self.inner.n_nodes(),
            self.inner.face_size(),
            self.inner.channels()
        )
    }
}

/// An equivariant layer between two tensor signatures.
#[pyclass(name = "Layer", module = "incidence_py")]
struct PyLayer {
    inner: TensorLayer,
}

#[pymethods]
impl PyLayer {
    /// A layer with every weight zero.
    #[new]
    #[pyo3(signature = (in_signature, out_signature=None, cin=1, cout=1))]
    fn new(in_signature: &str, out_signature: Option<&str>, cin: usize, cout: usize) -> PyResult<Self> {
        let a = sig(in_signature)?;
        let b = out_signature.map(sig).transpose()?.unwrap_or_else(|| a.clone());
        Ok(PyLayer { inner: TensorLayer::zeros(a, b, cin, cout).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (in_signature, out_signature=None, cin=1, cout=1, seed=0, bound=3))]
    fn random(
        in_signature: &str,
        out_signature: Option<&str>,
        cin: usize,
        cout: usize,
        seed: u64,
        bound: i64,
    ) -> PyResult<Self> {
        let mut layer = Self::new(in_signature, out_signature, cin, cout)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = &layer.inner.map;
        layer.inner.map =
            EquivariantMap::random_integers(map.input().clone(), map.output().clone(), -bound, bound, &mut rng);
        Ok(layer)
    }

    #[staticmethod]
    #[pyo3(signature = (signature, channels=1))]
    fn identity(signature: &str, channels: usize) -> PyResult<Self> {
        let s = sig(signature)?;
        let map = EquivariantMap::identity(OrbitSignature::of_tensor(&s, channels).map_err(err)?);
        Ok(PyLayer { inner: TensorLayer::new(s.clone(), s, map).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = layer_from_str(text).map_err(err)?;
        let (Some(a), Some(b)) = (file.input_signature, file.output_signature) else {
            return Err(IncidenceError::new_err("layer file must name both tensor signatures"));
        };
        Ok(PyLayer { inner: TensorLayer::new(a, b, file.map).map_err(err)? })
    }

    fn to_json(&self) -> String {
        let j = layer_to_json(&self.inner.map, Some(&self.inner.input), Some(&self.inner.output));
        serde_json::to_string_pretty(&j).expect("layer serializes")
    }

    /// Block keys such as `"1,2->1,2"` in canonical order.
    fn blocks(&self) -> Vec<String> {
        self.inner.map.blocks().iter().map(|b| b.key()).collect()
    }

    /// Term ids of one block, in weight order.
    fn terms(&self, block: &str) -> PyResult<Vec<String>> {
        let b = self.inner.map.block(block).map_err(err)?;
        Ok(b.terms().iter().map(|t| t.id()).collect())
    }

    fn weight_count(&self) -> usize {
        self.inner.map.weight_count()
    }

    #[pyo3(signature = (block, term, value, cin=0, cout=0))]
    fn set_weight(&mut self, block: &str, term: &str, value: f64, cin: usize, cout: usize) -> PyResult<()> {
        self.inner.map.set_weight(block, term, cin, cout, value).map_err(err)
    }

    #[pyo3(signature = (block, term, cin=0, cout=0))]
    fn get_weight(&self, block: &str, term: &str, cin: usize, cout: usize) -> PyResult<f64> {
        self.inner.map.get_weight(block, term, cin, cout).map_err(err)
    }

    /// Applies the layer; `mask` restricts the output to the listed entries.
    #[pyo3(signature = (tensor, agg="sum", mask=None))]
    fn apply(&self, tensor: &PyTensor, agg: &str, mask: Option<Vec<bool>>) -> PyResult<PyTensor> {
        let y = self.inner.apply_with(&tensor.inner, self::agg(agg)?).map_err(err)?;
        let y = match mask {
            None => y,
            Some(bits) => y.masked(&Mask::new(bits)).map_err(err)?,
        };
        Ok(PyTensor { inner: y })
    }

    /// Applies the underlying map to face-vectors directly.
    fn apply_vectors(&self, inputs: Vec<PyFaceVector>) -> PyResult<Vec<PyFaceVector>> {
        let xs: Vec<FaceVector> = inputs.into_iter().map(|v| v.inner).collect();
        let ys = apply_map(&self.inner.map, &xs).map_err(err)?;
        Ok(ys.into_iter().map(|inner| PyFaceVector { inner }).collect())
    }
}

/// Number of pool-and-broadcast terms between faces of sizes `m` and `m2`.
#[pyfunction]
#[pyo3(name = "tau")]
fn py_tau(m: usize, m2: usize) -> u64 {
    tau(m, m2)
}

#[pyfunction]
#[pyo3(name = "tau_symmetric")]
fn py_tau_symmetric(m: usize, m2: usize) -> u64 {
    tau_symmetric(m, m2)
}

#[pyfunction]
#[pyo3(name = "counting_symmetric")]
fn py_counting_symmetric(order: usize) -> u64 {
    counting_symmetric(order)
}

#[pyfunction]
#[pyo3(name = "relaxed_parameters")]
fn py_relaxed_parameters(order: usize) -> u64 {
    relaxed_parameters(order)
}

#[pyfunction]
#[pyo3(name = "bell")]
fn py_bell(n: usize) -> PyResult<u64> {
    bell(n).map_err(err)
}

/// Independent parameters of a layer between two tensor signatures.
#[pyfunction]
#[pyo3(signature = (in_signature, out_signature=None, symmetric=false, cin=1, cout=1))]
fn count_parameters(
    in_signature: &str,
    out_signature: Option<&str>,
    symmetric: bool,
    cin: usize,
    cout: usize,
) -> PyResult<u64> {
    let a = sig(in_signature)?;
    let b = out_signature.map(sig).transpose()?.unwrap_or_else(|| a.clone());
    let oa = OrbitSignature::of_tensor(&a, cin).map_err(err)?;
    let ob = OrbitSignature::of_tensor(&b, cout).map_err(err)?;
    Ok(total_parameters(&oa, &ob, symmetric))
}

/// `(m, kappa_m)` pairs for a tensor signature.
#[pyfunction]
#[pyo3(name = "multiplicities")]
fn py_multiplicities(signature: &str) -> PyResult<Vec<(usize, usize)>> {
    multiplicities(&sig(signature)?).map_err(err)
}

/// Valid partitions of a signature, printed with 1-based positions.
#[pyfunction]
fn partitions(signature: &str) -> PyResult<Vec<String>> {
    let ps = enumerate_valid_partitions(&sig(signature)?).map_err(err)?;
    Ok(ps.iter().map(ToString::to_string).collect())
}

#[pyfunction]
#[pyo3(signature = (n_nodes, face_size, directed=true))]
fn faces(n_nodes: usize, face_size: usize, directed: bool) -> PyResult<Vec<Vec<u32>>> {
    let fs = enumerate_faces(n_nodes, face_size, directed).map_err(err)?;
    Ok(fs.into_iter().map(Face::into_nodes).collect())
}

#[pyfunction]
#[pyo3(signature = (nodes, n_nodes, directed=true))]
fn face_index(nodes: Vec<u32>, n_nodes: usize, directed: bool) -> PyResult<usize> {
    let f = Face::new(nodes, directed, n_nodes).map_err(err)?;
    Ok(face_to_index(&f, n_nodes).map_err(err)?.0)
}

#[pyfunction]
#[pyo3(signature = (index, n_nodes, face_size, directed=true))]
fn face_at(index: usize, n_nodes: usize, face_size: usize, directed: bool) -> PyResult<Vec<u32>> {
    let f = index_to_face(FaceIndex(index), n_nodes, face_size, directed).map_err(err)?;
    Ok(f.into_nodes())
}

/// Term ids `P={..};B=(..)` between face sizes, in canonical order.
#[pyfunction]
fn terms(m: usize, m2: usize) -> Vec<String> {
    enumerate_terms(m, m2).iter().map(|t| t.id()).collect()
}

/// Output-face by input-face grid of orbit ids.
#[pyfunction]
#[pyo3(name = "sharing_pattern")]
fn py_sharing_pattern(m: usize, m2: usize, n_nodes: usize) -> Vec<Vec<usize>> {
    sharing_pattern(m, m2, n_nodes)
}

/// One oracle verification case as a JSON string.
#[pyfunction]
#[pyo3(signature = (m, m2, n_nodes, seed=0))]
fn verify(m: usize, m2: usize, n_nodes: usize, seed: u64) -> PyResult<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let case = verify_case(m, m2, n_nodes, &mut rng).map_err(err)?;
    Ok(serde_json::to_string(&case).expect("case serializes"))
}

/// `(full, single, stacked)` span dimensions of the graph operators.
#[pyfunction]
#[pyo3(signature = (n_nodes=5))]
fn span_dimensions(n_nodes: usize) -> PyResult<(usize, usize, usize)> {
    let s = two_layer_span_check(n_nodes).map_err(err)?;
    Ok((s.full, s.single, s.stacked))
}

/// Relaxed layer: one weight matrix per subset of pooled dimensions.
#[pyfunction]
#[pyo3(signature = (tensor, weights, cout=1, agg="sum"))]
fn apply_relaxed_layer(tensor: &PyTensor, weights: Vec<f64>, cout: usize, agg: &str) -> PyResult<PyTensor> {
    let y = apply_relaxed(&tensor.inner, &weights, cout, self::agg(agg)?).map_err(err)?;
    Ok(PyTensor { inner: y })
}

/// Face counts by size for the closure of a facet list (JSON text).
#[pyfunction]
fn complex_counts(text: &str) -> PyResult<Vec<usize>> {
    Ok(complex_from_str(text).map_err(err)?.counts())
}

/// Incidence tensor between two face sizes of a complex (JSON text).
#[pyfunction]
#[pyo3(signature = (text, row_size, col_size, shared=None))]
fn complex_incidence(text: &str, row_size: usize, col_size: usize, shared: Option<usize>) -> PyResult<PyTensor> {
    let c = complex_from_str(text).map_err(err)?;
    let (t, _) = incidence_from_complex(&c, row_size, col_size, shared).map_err(err)?;
    Ok(PyTensor { inner: t })
}

/// `(valid, rank_sizes, violations)` for a graded poset (JSON text).
#[pyfunction]
fn poset_report(text: &str) -> PyResult<(bool, Vec<usize>, Vec<String>)> {
    let r = validate_poset(&poset_from_str(text).map_err(err)?);
    Ok((r.valid, r.rank_sizes, r.violations))
}

#[pyfunction]
#[pyo3(signature = (text, rank_a, rank_b, shared=None))]
fn poset_incidence(text: &str, rank_a: usize, rank_b: usize, shared: Option<usize>) -> PyResult<PyTensor> {
    let p = poset_from_str(text).map_err(err)?;
    let (t, _) = incidence_from_poset(&p, rank_a, rank_b, shared).map_err(err)?;
    Ok(PyTensor { inner: t })
}

#[pymodule]
fn incidence_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IncidenceError", m.py().get_type::<IncidenceError>())?;
    m.add_class::<PyTensor>()?;
    m.add_class::<PyFaceVector>()?;
    m.add_class::<PyLayer>()?;
    m.add_function(wrap_pyfunction!(py_tau, m)?)?;
    m.add_function(wrap_pyfunction!(py_tau_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(py_counting_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(py_relaxed_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(py_bell, m)?)?;
    m.add_function(wrap_pyfunction!(count_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(py_multiplicities, m)?)?;
    m.add_function(wrap_pyfunction!(partitions, m)?)?;
    m.add_function(wrap_pyfunction!(faces, m)?)?;
    m.add_function(wrap_pyfunction!(face_index, m)?)?;
    m.add_function(wrap_pyfunction!(face_at, m)?)?;
    m.add_function(wrap_pyfunction!(terms, m)?)?;
    m.add_function(wrap_pyfunction!(py_sharing_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(span_dimensions, m)?)?;
    m.add_function(wrap_pyfunction!(apply_relaxed_layer, m)?)?;
    m.add_function(wrap_pyfunction!(complex_counts, m)?)?;
    m.add_function(wrap_pyfunction!(complex_incidence, m)?)?;
    m.add_function(wrap_pyfunction!(poset_report, m)?)?;
    m.add_function(wrap_pyfunction!(poset_incidence, m)?)?;
    Ok(())
}
