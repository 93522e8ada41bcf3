//! Error type shared across the toolkit.

use std::fmt;

/// Errors produced by configuration, geometry, linear algebra and I/O.
#[derive(Debug)]
pub enum Error {
    /// Invalid configuration (non-COLA window, bad hop, out-of-range parameter).
    Config(String),
    /// Shape mismatch between operands.
    Dimension(String),
    /// Scenario geometry problem (position outside room, infeasible rt60).
    Geometry(String),
    /// Regressor carries no energy anywhere; a filter cannot be estimated.
    ZeroRegressor,
    /// A metric denominator (reference or segment) carries no energy.
    Silent(String),
    /// Linear solve failed at a frequency bin even after diagonal loading.
    Singular { bin: usize },
    /// File I/O failure.
    Io(std::io::Error),
    /// WAV format problem.
    Audio(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Geometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::ZeroRegressor => write!(f, "regressor signal carries no energy"),
            Error::Silent(msg) => write!(f, "silent signal: {msg}"),
            Error::Singular { bin } => write!(f, "singular system at frequency bin {bin}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Audio(msg) => write!(f, "audio format error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<hound::Error> for Error {
    fn from(e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(io) => Error::Io(io),
            other => Error::Audio(other.to_string()),
        }
    }
}
