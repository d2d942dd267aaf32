use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("cone has no rank-one certificate")]
    MissingCertificate,

    #[error("cone is degenerate (no positive definite element); call reduce_nondegenerate first")]
    Degenerate,

    #[error("graph is not chordal; chordless cycle {cycle:?}")]
    NotChordal { cycle: Vec<usize> },

    #[error("invalid glue: {0}")]
    InvalidGlue(String),

    #[error("face contains no nonzero element")]
    NoRay,

    #[error("no extreme-ray oracle for {0}")]
    OracleUnavailable(String),

    #[error("boundary line search failed: {reason} (mu trace {trace:?})")]
    LineSearch { reason: String, trace: Vec<f64> },

    #[error("pencil is not simultaneously structured: {0}")]
    NotStructured(String),

    #[error("degree {0} is outside the classification catalog")]
    OutOfCatalog(usize),

    #[error("codimension is {0}, expected 1")]
    WrongCodimension(usize),

    #[error("incompatible generator lists at indices {indices:?}")]
    Incompatible { indices: Vec<usize> },

    #[error("relaxation did not reach optimality: {0}")]
    NotOptimal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
