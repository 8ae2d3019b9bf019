use std::fmt;
use std::path::PathBuf;

/// Position inside a file where parsing failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line number (text formats and PLY headers).
    Line(usize),
    /// 0-based byte offset (binary PLY bodies).
    Byte(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Byte(n) => write!(f, "byte offset {n}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PpcError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite coordinate in row {row}")]
    NonFiniteCoordinate { row: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("target count {target} exceeds cloud size {available}")]
    TargetExceedsCloud { target: usize, available: usize },
    #[error("operation needs at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("direction is not a unit vector (norm {norm})")]
    NonUnitVector { norm: f64 },
    #[error("matrix is not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("row count mismatch: {left} vs {right}")]
    RowCountMismatch { left: usize, right: usize },
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PpcError {
    pub(crate) fn parse(location: Location, message: impl Into<String>) -> Self {
        PpcError::Parse {
            location,
            message: message.into(),
        }
    }
}

pub type Result<T, E = PpcError> = std::result::Result<T, E>;
