use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PcsError>;

#[derive(Debug, Error)]
pub enum PcsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A probability vector or trace drifted further than rounding can explain.
    #[error("numeric integrity violation: {0}")]
    NumericIntegrity(String),

    #[error("capacity exceeded: {what} ({requested} > limit {limit})")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("shadow accumulator holds no measurements")]
    EmptyAccumulator,

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("experiment {experiment_id}, M={m}, trial {trial}: {source}")]
    Trial {
        experiment_id: String,
        m: usize,
        trial: usize,
        #[source]
        source: Box<PcsError>,
    },
}

impl PcsError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PcsError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PcsError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by user input (bad config, bad arguments, bad files).
    pub fn is_config_error(&self) -> bool {
        match self {
            PcsError::InvalidArgument(_)
            | PcsError::Config(_)
            | PcsError::Format { .. }
            | PcsError::Capacity { .. } => true,
            PcsError::Trial { source, .. } => source.is_config_error(),
            _ => false,
        }
    }

    /// True for failures that signal non-physical numerics (probabilities, traces, overflow).
    pub fn is_numeric_error(&self) -> bool {
        match self {
            PcsError::NumericIntegrity(_)
            | PcsError::Range(_)
            | PcsError::Decomposition(_)
            | PcsError::EmptyAccumulator => true,
            PcsError::Trial { source, .. } => source.is_numeric_error(),
            _ => false,
        }
    }
}
