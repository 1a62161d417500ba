use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fit did not converge after {iterations} iterations (residual norm {residual_norm:.3e}): {reason}")]
    FitFailure {
        iterations: usize,
        residual_norm: f64,
        reason: String,
    },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::FitFailure { .. } | Error::IllConditioned(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
