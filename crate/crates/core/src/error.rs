//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, estimation, and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability vector violated its invariants (range, normalization).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A quantum state violated its invariants (norm, Hermiticity, trace, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A gate matrix failed the unitarity check.
    #[error("invalid gate: {0}")]
    InvalidGate(String),

    /// A Kraus set failed the completeness check.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// Operands with incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix was singular or too ill-conditioned to invert.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Classifier training could not produce a valid model.
    #[error("training failed: {0}")]
    Training(String),

    /// Nonlinear least squares did not converge or produced invalid parameters.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Invalid run configuration (bad file, bad value, missing input).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data (e.g. a bad CSV row).
    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
