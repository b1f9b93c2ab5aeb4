use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} qubits vs {right} qubits")]
    Dimension { left: usize, right: usize },

    #[error("{0} qubits exceeds the supported limit of {1}")]
    TooManyQubits(usize, usize),

    #[error("operator is not Hermitian: imaginary part {0:e}")]
    NotHermitian(f64),

    #[error("exponential series did not converge after {0} terms")]
    SeriesDiverged(usize),

    #[error("invalid pool definition: {0}")]
    Pool(String),

    #[error("qubit pool stripping produced {label} with an even number of Y letters")]
    EvenYCount { label: String },

    #[error("candidate pool is empty")]
    EmptyPool,

    #[error("invalid precision: {0}")]
    Precision(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse {field}: {reason}")]
    Parse { field: String, reason: String },

    #[error("validation failed for {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
