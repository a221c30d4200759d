use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        path: PathBuf,
        /// 1-based line number in the file, header is line 1.
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: duplicate header name {name:?} at column {column}")]
    DuplicateHeader {
        path: PathBuf,
        name: String,
        column: usize,
    },

    #[error("{path}: empty header name at column {column}")]
    EmptyHeader { path: PathBuf, column: usize },

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("label column {column:?} contains a missing value at row {row}")]
    MissingLabel { column: String, row: usize },

    #[error("labels contain a single class ({0}); both classes are required")]
    SingleClass(u8),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    #[error("jaccard distance requires binary (0/1) features, found {0}")]
    NonBinary(f64),

    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error("weight for training sample {index} underflowed to zero")]
    WeightUnderflow { index: usize },

    #[error("cannot normalize weights with mean {0:e}")]
    DegenerateWeights(f64),

    #[error("roc auc is undefined when labels contain a single class")]
    UndefinedAuc,

    #[error("no samples to evaluate")]
    Empty,

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
