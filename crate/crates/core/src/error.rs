use thiserror::Error;

/// Errors surfaced by the library.
///
/// Numeric breakage that can only come from a bug (a Gram matrix losing
/// positive definiteness, an inverse drifting past its tolerance) panics
/// instead of returning a variant; callers cannot meaningfully recover.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance generation failed after {attempts} rejection attempts")]
    GenerationFailed { attempts: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
