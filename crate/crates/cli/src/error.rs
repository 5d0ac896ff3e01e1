use thiserror::Error;

/// Front-end errors, mapped onto process exit codes: usage, config, and I/O
/// problems exit 1; numerical degeneracies exit 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("config error ({path}): {message}")]
    Config { path: String, message: String },

    #[error("I/O error ({path}): {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] sinorder::Error),

    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(sinorder::Error::DegenerateComponent(_))
            | Error::DegenerateNormalization(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn config(path: &str, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
