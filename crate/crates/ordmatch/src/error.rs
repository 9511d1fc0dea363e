use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data (profile text, matrix JSON, strategy JSON, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Structurally valid data with inconsistent dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numeric or combinatorial consistency check failed (rows not summing
    /// to one, decomposition residue nonzero, ...).
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// An enumeration outgrew its node budget. Carries the number of nodes
    /// expanded before giving up.
    #[error("enumeration budget exceeded after {nodes} nodes (budget {budget})")]
    Budget { nodes: u64, budget: u64 },

    /// An instance is outside the supported exact-enumeration range.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// An adversary strategy does not fit the instance it is applied to.
    #[error("invalid strategy: {0}")]
    Strategy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
