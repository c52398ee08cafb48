use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid chain: {0}")]
    Validation(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("iterates diverged at step {step}: |theta| = {norm:e}")]
    Diverged { step: usize, norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            residual,
        }
    }
}
