use thiserror::Error;

/// Errors produced by model construction, integration, and ensemble runs.
#[derive(Debug, Error)]
pub enum Error {
    /// A spectrum or search problem violates its construction rules.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// An operation was called with arguments outside its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A quantum state failed a consistency check (e.g. lost normalization).
    #[error("state integrity: {0}")]
    Integrity(String),

    /// Numerical accuracy degraded beyond tolerance; retry with a smaller step.
    #[error("accuracy failure: {0}")]
    Accuracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
