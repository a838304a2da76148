use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curation error on signal `{signal}`: {reason}")]
    Curation { signal: String, reason: String },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("resampling error for class {class}: {reason}")]
    Resampling { class: u8, reason: String },

    #[error("training error: {0}")]
    Training(String),

    #[error("prediction error: {0}")]
    Prediction(String),

    #[error("mixture fit error: {0}")]
    Fit(String),

    #[error("population initialization error: {0}")]
    Initialization(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model artifact error ({path}): {reason}")]
    ModelArtifact { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::ModelArtifact {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line harness: 2 for bad input or
    /// configuration, 3 for data too thin to fit or initialize from, 4 for
    /// unusable model artifacts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Curation { .. }
            | Error::DegenerateWindow(_)
            | Error::InvalidConfig(_)
            | Error::Prediction(_)
            | Error::Consistency(_)
            | Error::UndefinedCorrelation(_)
            | Error::Toml(_)
            | Error::Io { .. }
            | Error::Csv(_) => 2,
            Error::InsufficientData(_)
            | Error::Resampling { .. }
            | Error::Training(_)
            | Error::Initialization(_)
            | Error::Fit(_) => 3,
            Error::ModelArtifact { .. } | Error::Json(_) => 4,
        }
    }
}
