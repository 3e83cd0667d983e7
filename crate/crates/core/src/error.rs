use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("vectors must have at least one component")]
    EmptyVector,

    #[error("index {index} is outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("k = {k} is outside 1..={dim}")]
    KOutOfRange { k: usize, dim: usize },

    #[error("refusing to enumerate subsets of a {dim}-dimensional space (limit {limit})")]
    CombinatorialBlowup { dim: usize, limit: usize },

    #[error("invalid norm specification: {0}")]
    InvalidSpec(String),

    #[error("vector is not supported within the index set {0}")]
    NotInSubspace(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver did not converge: {message} (achieved gap {achieved_gap:e})")]
    NonConvergence { message: String, achieved_gap: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn non_convergence(message: impl Into<String>, achieved_gap: f64) -> Self {
        Error::NonConvergence {
            message: message.into(),
            achieved_gap,
        }
    }
}
