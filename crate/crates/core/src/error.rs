use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("requested an empty sample")]
    EmptyRequest,
    #[error("invalid sampling region: {0}")]
    InvalidRegion(String),
    #[error("at least two generator points are required, got {0}")]
    TooFewGenerators(usize),
    #[error("no tessellation vertex on the {0} window border")]
    NoBoundaryVertex(&'static str),
    #[error("no path between vertex {0} and vertex {1}")]
    Disconnected(usize, usize),
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("width profile has {got} entries for {expected} arcs")]
    InvalidWidths { expected: usize, got: usize },
    #[error("degenerate corner between arcs {0} and {1}")]
    DegenerateCorner(usize, usize),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: String, reason: String },
    #[error("boolean operation failed: {0}")]
    Boolean(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh is not closed")]
    NotClosed,
    #[error("defect footprint lies outside the slab footprint")]
    OutOfBounds,
    #[error("generation failed after {attempts} attempts: {last}")]
    GenerationFailed { attempts: usize, last: Box<Error> },
    #[error("{0}")]
    Io(String),
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },
}

impl Error {
    pub fn params(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
