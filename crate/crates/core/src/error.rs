//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Malformed or inconsistent input data (bad schema, empty table, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A parameter outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArg(String),

    /// Model fitting or prediction failure (schema mismatch, unseen level, ...).
    #[error("model error: {0}")]
    Model(String),

    /// External-predictor wire protocol violation or child failure.
    #[error("external predictor: {0}")]
    Protocol(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArg(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}
