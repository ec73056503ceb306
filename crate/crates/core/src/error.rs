use thiserror::Error;

/// Errors produced by the solver, the estimator and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension limit exceeded: n = {n}, hyperplanes = {hyperplanes} (max n = 12, max hyperplanes = 28)")]
    DimensionLimit { n: usize, hyperplanes: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("preference cone has empty interior (margin {margin:e})")]
    InfeasibleCone { margin: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by an invalid configuration rather than a runtime failure.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
