use thiserror::Error;

/// Errors produced by validation, numerical routines, samplers, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (bad labels, wrong outcome alphabet, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Operands whose dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A domain-type invariant failed validation (hermiticity, normalization, …).
    #[error("validation failed: {0}")]
    Validation(String),
    /// An iterative numerical routine failed to meet its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A sampler exhausted its proposal budget (indicates an envelope bug).
    #[error("sampler failure: {0}")]
    Sampler(String),
    /// The operation is defined only for a narrower class of inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The operation's model assumptions do not hold for the given input.
    #[error("model assumption violated: {0}")]
    Assumption(String),
    /// A guard that should be unreachable fired.
    #[error("internal error: {0}")]
    Internal(String),
    /// JSON (de)serialization failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
