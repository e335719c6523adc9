use thiserror::Error;

/// Errors reported by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    InvalidDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length must be a non-negative finite number, got {0}")]
    InvalidLength(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point id {id} out of range for dataset of {len} points")]
    PointIdOutOfRange { id: usize, len: usize },

    #[error("dataset must contain at least one point")]
    EmptyDataset,

    #[error("invalid point ids: {0}")]
    InvalidIds(String),

    #[error("coordinate {dim} of point {id} is not finite")]
    NonFiniteCoordinate { id: usize, dim: usize },

    #[error("dendrogram is incomplete ({clusters} clusters remain)")]
    IncompleteDendrogram { clusters: usize },

    #[error("cut level {k} out of range 1..={n}")]
    CutLevelOutOfRange { k: usize, n: usize },

    #[error("merge sequences disagree on point count: {left} vs {right}")]
    PointCountMismatch { left: usize, right: usize },

    #[error("triple violates the projection-bound hypothesis: {0}")]
    HypothesisViolated(String),

    #[error("synthetic generation failed: {0}")]
    GenerationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
