use thiserror::Error;

/// Errors produced by dvpool.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (bad range, empty level set,
    /// malformed configuration, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("npy: {0}")]
    Npy(String),

    #[error("labels: {0}")]
    Labels(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
