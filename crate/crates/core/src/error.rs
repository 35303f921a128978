use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coordinate ({x}, {y}) lies outside the grid bounding box")]
    OutOfBounds { x: f64, y: f64 },

    #[error("symbol {0} does not name a grid region")]
    NotARegion(i32),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("trip rejected: sample {index} lies outside the grid")]
    TripRejected { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown trie node {0}")]
    UnknownNode(u32),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("not found: {0}")]
    NotFound(String),
}

impl Error {
    /// Stable short name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid-grid",
            Error::OutOfBounds { .. } => "out-of-bounds",
            Error::NotARegion(_) => "not-a-region",
            Error::Parameter(_) => "parameter",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::TripRejected { .. } => "trip-rejected",
            Error::Precondition(_) => "precondition",
            Error::UnknownNode(_) => "unknown-node",
            Error::InvalidPartition(_) => "invalid-partition",
            Error::Capacity(_) => "capacity",
            Error::NotFound(_) => "not-found",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
