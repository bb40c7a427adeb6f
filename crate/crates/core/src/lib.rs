//! Equivariant linear maps over incidence tensors.
//!
//! The crate covers faces over a node set, incidence tensors with equality
//! constraints and their orbit decomposition, pool-and-broadcast maps with
//! their parameter counts, a brute-force orbit oracle for checking them, the
//! operator algebra of graph layers, and conversion of simplicial complexes and
//! graded posets into incidence tensors.

pub mod algebra;
pub mod equimap;
pub mod error;
pub mod faces;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod tensors;

pub use equimap::{
    apply_map, apply_masked, apply_relaxed, apply_term, broadcast, enumerate_terms, pool,
    symmetrize_map, tau, tau_symmetric, total_parameters, Aggregator, EquivariantMap,
    OrbitSignature, PoolBroadcastTerm, TensorLayer,
};
pub use error::{Error, Result};
pub use faces::{Face, FaceIndex, FaceSpace, NodeId, Permutation};
pub use tensors::{
    decompose, enumerate_valid_partitions, multiplicity, permute_tensor, reassemble, ConstraintSet,
    Dim, FaceVector, IncidenceTensor, Mask, OrbitDecomposition, Position, SetPartition,
    TensorSignature,
};
