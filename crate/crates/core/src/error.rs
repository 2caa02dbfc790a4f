use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed delimited text: {0}")]
    Csv(#[from] csv::Error),
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("column `{0}` listed in the adapter is absent from the file")]
    MissingColumn(String),
    #[error("label value `{value}` on data row {row} is not listed by the adapter")]
    UnmappableLabel { value: String, row: usize },
    #[error("invalid adapter: {0}")]
    Adapter(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("both classes must be present (benign: {benign}, malicious: {malicious})")]
    SingleClass { benign: usize, malicious: usize },
    #[error("class {class} has {count} rows, fewer than the {k} folds requested")]
    TooFewRows { class: u8, count: usize, k: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid score {value} for feature `{feature}`")]
    InvalidScore { feature: String, value: f64 },
    #[error("score vectors cover different feature lists")]
    MismatchedFeatures,
    #[error("model expects {expected} features, got {got}")]
    FeatureCountMismatch { expected: usize, got: usize },
    #[error("model document: {0}")]
    ModelFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
