use thiserror::Error;

/// Errors produced by construction and evolution routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: expected {expected} points, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("numerical failure at step {step}: {message}")]
    NumericalFailure { step: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
