use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),

    #[error("undefined diagnostic: {0}")]
    UndefinedDiagnostic(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::NotImplemented(_) => "not_implemented",
            Error::Evaluation(_) => "evaluation",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidParameters(_) => "invalid_parameters",
            Error::UnsupportedProblem(_) => "unsupported_problem",
            Error::UndefinedDiagnostic(_) => "undefined_diagnostic",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
