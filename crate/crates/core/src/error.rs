use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code specification: {0}")]
    InvalidCode(String),
    #[error("unknown code name `{0}`")]
    UnknownCode(String),
    #[error("length mismatch: expected a multiple of {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid decoder configuration: {0}")]
    InvalidConfig(String),
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),
    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("root search did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
