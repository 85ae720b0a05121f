use thiserror::Error;

/// Errors raised by the solver, the criteria engine and the lab front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric failure: {message}")]
    Numeric {
        message: String,
        /// Recent `(t, dt, sup)` samples leading up to the failure.
        trace: Vec<(f64, f64, f64)>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            trace: Vec::new(),
        }
    }

    /// True for errors caused by bad configuration rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Unsupported(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
