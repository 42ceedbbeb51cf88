use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("t = {t} lies before the curve domain start {t_min}")]
    OutOfDomain { t: f64, t_min: f64 },

    #[error("index {index} out of range for trajectory of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("predicted paths do not cross")]
    NoCrossing,

    /// Rank deficiency, separation, or a missing outcome class.
    #[error("degenerate fit: {reason} (columns: {})", columns.join(", "))]
    DegenerateFit { reason: String, columns: Vec<String> },

    #[error(
        "fit did not converge after {iterations} iterations \
         (gradient max-norm {gradient_norm:e}, log-likelihood {log_likelihood})"
    )]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
        log_likelihood: f64,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateFit { .. } | Error::NotConverged { .. } => 3,
            _ => 2,
        }
    }
}
