use thiserror::Error;

/// Errors produced by the estimators, procedures and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sample size mismatch: expected {expected} rows, got {actual}")]
    SampleSizeMismatch { expected: usize, actual: usize },

    #[error("need at least {required} observations, got {actual}")]
    TooFewObservations { required: usize, actual: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("semi-analytic uniform expectations are unsupported for the {0} kernel")]
    SemiAnalyticUnsupported(&'static str),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used by the CLI to select an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::SemiAnalyticUnsupported(_) => ErrorClass::Config,
            Error::Numerical(_) => ErrorClass::Numerical,
            Error::DimensionMismatch { .. }
            | Error::SampleSizeMismatch { .. }
            | Error::TooFewObservations { .. }
            | Error::NonFinite { .. }
            | Error::Data(_)
            | Error::Io(_) => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
