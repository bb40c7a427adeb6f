use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("invalid face {face:?} for {n_nodes} nodes: {reason}")]
    InvalidFace {
        face: Vec<u32>,
        n_nodes: usize,
        reason: String,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("inconsistent decomposition: {0}")]
    InconsistentDecomposition(String),

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("aggregation over an empty set with {0}")]
    EmptyAggregation(&'static str),

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("value at flat index {index} is not an integer: {value}")]
    NotIntegral { index: usize, value: f64 },

    #[error("under-resolved orbits: {n_nodes} nodes cannot realize every equality pattern for {m_in} -> {m_out} (need at least {needed})")]
    UnderResolvedOrbits {
        m_in: usize,
        m_out: usize,
        n_nodes: usize,
        needed: usize,
    },

    #[error("illegal operator L^{{{from}->{to}}}_{rank}")]
    IllegalOperator { from: usize, to: usize, rank: usize },

    #[error("value out of supported range: {0}")]
    Range(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("irregular rank {rank}: elements have differing face sizes")]
    UnsupportedIrregular { rank: usize },

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
