use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot compose an empty list of propagators")]
    EmptyComposition,

    #[error("invalid design parameters: {0}")]
    InvalidDesign(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown figure `{name}`; valid names: {valid}")]
    UnknownFigure { name: String, valid: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(name))
    }
}
