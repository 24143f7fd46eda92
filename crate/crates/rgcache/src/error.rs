use std::path::PathBuf;

/// Errors produced by the toolkit.
///
/// `Io`/`Decode`/`UnsupportedFormat` are file-level problems, `Solver` is a
/// numerical failure, everything else is a caller mistake (bad dimensions or
/// parameter values). The CLI maps these groups to distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solver stalled: relative residual {achieved:.3e} after {iterations} iterations (tolerance {tolerance:.3e})")]
    Solver {
        achieved: f64,
        tolerance: f64,
        iterations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn decode(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Decode {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn dims(message: impl Into<String>) -> Self {
        Error::DimensionMismatch(message.into())
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
