//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the numerical kernels and the experiment layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The argument is valid mathematically but outside the range for which
    /// the implemented bound or algorithm has been validated.
    #[error("out of validated range: {0}")]
    OutOfValidatedRange(String),

    /// A spectral truncation is too short for the requested tolerance.
    #[error(
        "truncation insufficient: j_max = {requested} too small, suggest j_max >= {suggested}"
    )]
    TruncationInsufficient { requested: usize, suggested: usize },

    /// Two fields or vectors live on different grids / have different lengths.
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    /// A trajectory produced a non-finite value.
    #[error("blow-up detected at step {step}")]
    BlowUp { step: usize },

    /// Division by a vanishing denominator (e.g. identical probe inputs).
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    /// An experiment configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialisation error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
