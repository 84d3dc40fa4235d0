use thiserror::Error;

/// Errors raised by the extension and certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed map spec: {0}")]
    MalformedSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Jacobian is singular at {0:?}")]
    SingularPoint(Vec<f64>),

    #[error("quadrature resolution {resolution} below minimum {minimum}")]
    ResolutionTooSmall { resolution: usize, minimum: usize },

    #[error("tensor rule of order {order} in dimension {dim} exceeds the node budget")]
    DimensionOverflow { order: usize, dim: usize },

    #[error("integrand is not finite at node {0:?}")]
    NonFiniteIntegrand(Vec<f64>),

    #[error("map evaluation is not finite near {0:?}")]
    NonFiniteEvaluation(Vec<f64>),

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("every sampled pair collapsed to a single image point")]
    DegenerateMap,

    #[error("{collapsed} of {total} sampled triples were degenerate")]
    DegenerateTriples { collapsed: usize, total: usize },

    #[error("determinant {0} is not positive")]
    NonpositiveDeterminant(f64),

    #[error("ball around {center:?} with radius {radius} has zero mass")]
    ZeroMassBall { center: Vec<f64>, radius: f64 },

    #[error("image of the ball is degenerate (diameter {0})")]
    DegenerateImage(f64),

    #[error("height {0} is not positive")]
    NonpositiveHeight(f64),

    #[error("vertical component {value} at {point:?} is not positive")]
    VanishingVertical { point: Vec<f64>, value: f64 },

    #[error("row {index}: {source}")]
    Row {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
