use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("edge {edge}: empty tail")]
    EmptyTail { edge: usize },

    #[error("edge {edge}: empty head")]
    EmptyHead { edge: usize },

    #[error("edge {edge}: weight {weight} is not strictly positive")]
    NonPositiveEdgeWeight { edge: usize, weight: f64 },

    #[error("vertex {vertex} is stationary but has a custom weight")]
    StationaryWeight { vertex: usize },

    #[error("vertex {vertex}: weight {weight} is not strictly positive")]
    NonPositiveVertexWeight { vertex: usize, weight: f64 },

    #[error("vertex {vertex}: no custom weight given")]
    MissingVertexWeight { vertex: usize },

    #[error("vertex id {id} out of range (n = {n})")]
    VertexOutOfRange { id: usize, n: usize },

    #[error("unknown vertex name {0:?}")]
    UnknownVertex(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid vertex set: {0}")]
    InvalidSet(String),

    #[error("operation requires a hypergraph without stationary vertices")]
    StationaryPresent,

    #[error("operation requires at least one stationary vertex")]
    NoStationary,

    #[error("operation requires unit weights on non-stationary vertices")]
    NonUnitWeights,

    #[error("operation requires degree-mode vertex weights")]
    NotDegreeMode,

    #[error("zero vector")]
    ZeroVector,

    #[error("vector is constant; no nontrivial sweep exists")]
    ConstantVector,

    #[error("enumeration cap exceeded: size {size} > cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("permutation is not consistent with the density vector at rank {rank}")]
    InconsistentPermutation { rank: usize },

    #[error("malformed flow network: {0}")]
    MalformedNetwork(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("history length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("stationary vertex {vertex} has no label")]
    MissingLabel { vertex: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
