use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("row {row}: label `{value}` does not map to 0 or 1")]
    InvalidLabel { row: usize, value: String },
    #[error("no usable numeric feature columns")]
    NoUsableColumns,
    #[error("column `{0}` has no observed values; mean imputation is undefined")]
    AllMissingColumn(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("class {class} has {count} instances, need at least {needed}")]
    TooFewInstances {
        class: u8,
        count: usize,
        needed: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("data matrix is degenerate: {0}")]
    Degenerate(&'static str),
    #[error("covariance factorization failed after jitter escalation to {jitter:e}")]
    Factorization { jitter: f64 },
    #[error("value out of domain for dimension `{dimension}`: {detail}")]
    OutOfDomain { dimension: String, detail: String },
    #[error("unknown model configuration `{0}`")]
    UnknownModel(String),
    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),
    #[error("unsupported model format tag `{0}`")]
    FormatTag(String),
}
