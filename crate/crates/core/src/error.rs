use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or scenario value failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("coordinate ({x}, {y}) is outside the {nx}x{ny} mesh")]
    OutOfBounds { x: usize, y: usize, nx: usize, ny: usize },

    /// The migration function is not defined on this mesh shape.
    #[error("unsupported migration function: {0}")]
    Unsupported(String),

    /// The thermal network cannot be solved as built.
    #[error("thermal model error: {0}")]
    Model(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
