//! Error type shared by all toolkit modules.

use thiserror::Error;

/// Unified error for the CSI feedback toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation precondition (shape mismatch,
    /// out-of-range index, malformed bitstream, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration value is inconsistent or out of range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Input is structurally valid but numerically degenerate
    /// (zero column, rank-deficient draw after retry, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An iterative numerical routine failed to converge.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Underlying file I/O failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A serialized artifact is malformed or has an unexpected layout.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
