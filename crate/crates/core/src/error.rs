use std::io;

/// Errors raised by tensor construction, the solvers and the file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("mode {mode} out of range for a tensor of order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed {kind} data: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }
}
