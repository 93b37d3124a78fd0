use thiserror::Error;

use crate::codec::DecodeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite gradient")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Decode(#[from] DecodeError),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("singular or ill-conditioned system: {0}")]
    Singular(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unstable regime: lambda = {lambda} >= 1")]
    UnstableRegime { lambda: f64 },

    #[error("divergence detected at iteration {iteration}")]
    Diverged {
        iteration: usize,
        partial: Box<crate::sim::MetricsLog>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
