use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] flowsieve::Error),
    #[error("cannot read config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report {path}: {source}")]
    Report {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage error, 2 data error, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        use flowsieve::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Io { .. } | CliError::Report { .. } => 2,
            CliError::Internal(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidArgument(_) | E::Adapter(_) => 1,
                E::InvalidScore { .. } | E::MismatchedFeatures | E::FeatureCountMismatch { .. } => 3,
                _ => 2,
            },
        }
    }
}
