use thiserror::Error;

/// Errors raised while building or running a simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arithmetic produced NaN or infinity where a finite value was required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The scenario or one of its parameters is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data (catalog rows, EM-DAT counts) is out of range or malformed.
    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
