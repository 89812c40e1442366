use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid input (bad graph, malformed record, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two bit vectors that must have equal length do not.
    #[error("bit length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// A certificate was requested for a top-class bound that does not
    /// clear the 1/2 threshold; the caller must abstain instead.
    #[error("abstain required: pA lower bound {pa_lower} is not above 1/2")]
    AbstainRequired { pa_lower: f64 },

    /// An exhaustive-enumeration oracle was asked to enumerate more bits
    /// than it is willing to (the cost is 2^bits).
    #[error("enumeration oracle limited to {max} bits, got {bits}")]
    OracleTooLarge { bits: usize, max: usize },

    /// Training diverged or produced non-finite values.
    #[error("training failed: {0}")]
    Training(String),

    /// A run configuration is unusable (missing files, inconsistent keys).
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
