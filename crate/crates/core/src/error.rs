use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("every point is fixed by the identity")]
    EveryPointFixed,
    #[error("map fixes infinity, no isometric circle")]
    NoIsometricCircle,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("fixed points must be distinct")]
    CoincidentFixedPoints,
    #[error("generator index {index} out of range for a group with {len} generators")]
    InvalidGenerator { index: usize, len: usize },
    #[error("line has no center/radius")]
    LineHasNoCenter,
    #[error("degenerate circle (discriminant {0})")]
    DegenerateCircle(f64),
    #[error("singular parameter: {0}")]
    SingularParameter(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("circles do not intersect (t = {0} < 1/2)")]
    NoIntersection(f64),
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image encoding error at {path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
