//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by design construction, model evaluation, engines, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural mismatch between vector/matrix shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Requested problem id is not in the registry.
    #[error("unknown problem id {0}; registered ids are 1..=12")]
    UnknownProblem(u32),

    /// Operation requires a regression-kind model.
    #[error("problem {id} has kind {kind}, which does not expose a mean-response gradient")]
    UnsupportedKind {
        /// Problem id.
        id: u32,
        /// The offending model kind.
        kind: String,
    },

    /// Information matrix cannot be factorized; certification is refused.
    #[error("singular information matrix: {0}")]
    SingularInformation(String),

    /// Invalid engine, plan, or repair configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
