use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no image frames found in {0}")]
    MissingFrames(PathBuf),

    #[error("landmark rows ({landmarks}) do not match frame count ({frames})")]
    CountMismatch { frames: usize, landmarks: usize },

    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),

    #[error("invalid clip: {0}")]
    InvalidClip(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed document: {0}")]
    Parse(String),

    #[error("polygon needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("landmarks are collinear, convex hull is degenerate")]
    DegenerateHull,

    #[error("landmarks are collinear, triangulation is degenerate")]
    DegenerateTriangulation,

    #[error("generated mask is empty")]
    EmptyMask,

    #[error("column {column} out of range for width {width}")]
    ColumnOutOfRange { column: usize, width: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("spatial extent {height}x{width} is smaller than one 7x7 patch")]
    TooSmall { height: usize, width: usize },

    #[error("frame {index}: {source}")]
    FrameFailure {
        index: usize,
        #[source]
        source: Box<Error>,
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
}
