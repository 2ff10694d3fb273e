use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the tuning engine.
#[derive(Debug, Error)]
pub enum TuneError {
    /// A caller broke an operation's precondition (wrong space, bad dimension, non-finite input).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("empty Pareto set")]
    EmptyParetoSet,

    #[error("unknown subQ id {0}")]
    UnknownSubq(usize),

    #[error("subQ {0} already completed")]
    AlreadyCompleted(usize),

    /// Invalid user configuration (workload, benchmark or scenario file).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl TuneError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        TuneError::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        TuneError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TuneError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user configuration rather than by a failed run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, TuneError::Config(_))
    }
}

pub type Result<T, E = TuneError> = std::result::Result<T, E>;
