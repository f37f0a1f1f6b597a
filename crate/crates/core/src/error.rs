use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },

    /// A configured resource cap (window size, chain count, enumeration budget) was exceeded.
    #[error("resource cap exceeded in {stage}: {message}")]
    Resource { stage: String, message: String },

    #[error("insufficient precision: {0}")]
    Precision(String),

    /// A quantity would need data from outside the finite window.
    #[error("censored: {0}")]
    Censored(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An internal invariant failed. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("order collision between distinct vertices {0} and {1}")]
    OrderCollision(usize, usize),

    #[error("stage {stage} did not converge within {sweeps} sweeps ({chains} chains outstanding)")]
    StageDivergence {
        stage: usize,
        sweeps: usize,
        chains: usize,
    },

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn resource(stage: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Resource {
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(
        source_name: impl Into<String>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
