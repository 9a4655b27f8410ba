use thiserror::Error;

use crate::model::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A conditional distribution became improper or a statistic that must be
    /// positive was not.
    #[error("degenerate chain state: {0}")]
    DegenerateState(String),

    /// A non-finite value appeared in the chain state. Carries everything
    /// recorded before the failure.
    #[error("chain diverged at iteration {iteration}: {reason}")]
    ChainDiverged {
        iteration: usize,
        reason: String,
        partial: Box<Trace>,
    },

    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
