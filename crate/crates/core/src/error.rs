use std::path::PathBuf;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dataset too small: need at least {required} points, have {available}")]
    DatasetTooSmall { required: usize, available: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("mesh error in element {element}: {reason}")]
    Mesh { element: usize, reason: String },

    #[error("matrix is singular or not positive definite (pivot {pivot})")]
    Singular { pivot: usize },

    #[error("Newton solver did not converge after {iterations} iterations (residual history {history:?})")]
    NewtonDivergence { iterations: usize, history: Vec<f64> },

    #[error("zero reference norm for {0}")]
    ZeroReference(&'static str),

    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
