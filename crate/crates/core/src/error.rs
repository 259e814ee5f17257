use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// Malformed checkpoint; `offset` is the byte position where decoding failed.
    #[error("checkpoint format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("singular matrix at site {site:?}: {detail}")]
    Singular { site: Option<usize>, detail: String },

    #[error("non-finite amplitude at site {site}, step {step}")]
    NonFinite { site: usize, step: u64 },

    #[error("observer failed at step {step}: {message}")]
    Observer { step: u64, message: String },

    #[error("config error in {path}{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        path: String,
        line: Option<usize>,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::InvalidConfiguration(_) | Error::Config { .. } => 2,
            Error::Singular { .. } | Error::NonFinite { .. } => 3,
            Error::Format { .. } | Error::Io { .. } | Error::Observer { .. } => 4,
        }
    }
}
