use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("node index {index} out of range for a graph with {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("edge ({0}, {1}) is not present")]
    EdgeAbsent(usize, usize),

    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("marginal mass error: {0}")]
    Mass(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("perturbation bound violated: exact distance {exact} exceeds bound {bound}")]
    BoundViolation { exact: f64, bound: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}
