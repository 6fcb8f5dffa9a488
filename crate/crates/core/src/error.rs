use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("box lies entirely outside the {width}x{height} frame")]
    OutsideFrame { width: u32, height: u32 },

    #[error("invalid frame dimensions {width}x{height}")]
    InvalidDims { width: u32, height: u32 },

    #[error("frame dimensions differ: {0}x{1} vs {2}x{3}")]
    DimsMismatch(u32, u32, u32, u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("bounding-box regressor is not trained")]
    UntrainedRegressor,

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unknown attribute tag `{0}`")]
    UnknownAttribute(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
