use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed or inconsistent input data.
    #[error("invalid data: {0}")]
    Data(String),

    /// The conditional likelihood needs more events than the model order.
    #[error("conditional likelihood needs n > L events (n = {n}, L = {order})")]
    InsufficientEvents { n: usize, order: usize },

    /// The model configuration has no guaranteed stationary marginal.
    #[error("model is not stationary: {0}")]
    NotStationary(String),

    /// A numerical routine failed (underflow, non-finite draw, no convergence).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
