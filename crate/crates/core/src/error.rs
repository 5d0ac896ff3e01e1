use thiserror::Error;

/// Errors produced by the estimation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated a precondition (dimension mismatch, out-of-range
    /// index, non-finite value, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A computation hit a numerically degenerate configuration, e.g. a
    /// reference waveform with zero energy.
    #[error("degenerate component: {0}")]
    DegenerateComponent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn degenerate(msg: impl Into<String>) -> Error {
    Error::DegenerateComponent(msg.into())
}
