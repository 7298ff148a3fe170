use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("constraint infeasible: {0}")]
    ConstraintInfeasible(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unbounded problem: {0}")]
    Unbounded(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("center is not contained in the constraint set")]
    InfeasibleCenter,

    #[error("rate fit impossible: {0}")]
    FitImpossible(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
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
