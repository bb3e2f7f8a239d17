use std::path::PathBuf;

use crate::metrics::MetricsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    /// A data row failed validation. `row` is 1-based and counts data rows,
    /// not the header.
    #[error("{path}: row {row}, field `{field}`: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        field: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tweet {id} has no intimacy score")]
    Unscored { id: u64 },

    #[error("prediction ids do not match gold ids: {0}")]
    IdMismatch(String),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error("linear system is singular at lambda = {lambda}; use lambda > 0")]
    Singular { lambda: f64 },

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by malformed input data rather than bad
    /// parameters or numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MissingColumn { .. }
                | Error::Row { .. }
                | Error::Format { .. }
                | Error::Unscored { .. }
                | Error::IdMismatch(_)
                | Error::Json(_)
        )
    }
}
