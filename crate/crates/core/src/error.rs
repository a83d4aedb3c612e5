use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate labels: both classes must be present")]
    DegenerateLabels,

    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("depth infeasible: {classes} classes cannot fit in depth {limit}")]
    DepthInfeasible { classes: usize, limit: usize },

    #[error("missing class data for class {0}")]
    MissingClassData(usize),

    #[error("untrained node {0}")]
    Untrained(usize),

    #[error("bad radius {0}")]
    BadRadius(f64),

    #[error("infeasible cover: ISV {0} has no covering candidate")]
    InfeasibleCover(usize),

    #[error("too large for exact solve: {isvs} ISVs exceeds limit {limit}")]
    TooLarge { isvs: usize, limit: usize },

    #[error("stale selection: {0}")]
    StaleSelection(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("too short: recording has {len} samples, window needs {window}")]
    TooShort { len: usize, window: usize },

    #[error("empty spec: at least one class is required")]
    EmptySpec,

    #[error("arity: distribution has {got} classes, dataset has {expected}")]
    Arity { expected: usize, got: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
