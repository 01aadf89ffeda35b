use thiserror::Error;

/// Library-wide error type. Variants distinguish caller mistakes
/// (`InvalidArgument`, `Config`), bad input data (`Parse`, `InvalidInstance`),
/// resource refusals (`LimitExceeded`), internal consistency failures that
/// indicate an encoder or solver bug (`Invariant`), and external-process
/// protocol problems (`Protocol`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("search limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("external solver protocol error: {msg}")]
    Protocol { msg: String, raw: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
