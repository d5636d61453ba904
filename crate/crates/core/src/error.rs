use thiserror::Error;

/// Errors raised by samplers, estimators and the CLI driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// An oracle was evaluated outside the domain where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Monte Carlo functional produced NaN or an infinity.
    #[error("non-finite functional value {value} at replicate {replicate}")]
    NonFinite { replicate: u64, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
