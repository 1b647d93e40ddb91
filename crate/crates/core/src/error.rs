//! Error type shared by every module of the crate.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Non-finite or otherwise malformed numeric input.
    #[error("invalid input: {0}")]
    Input(String),

    /// Not enough observations for the requested construction.
    #[error("insufficient data: need at least {needed} rows, have {available}")]
    InsufficientData { needed: usize, available: usize },

    /// Invalid configuration value (parameters, plans, lag sets, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Shapes that do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Problems with ingested data files (parse failures, duplicate stamps, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A numerical routine could not produce a meaningful answer.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
