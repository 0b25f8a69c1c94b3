use thiserror::Error;

/// Everything that can go wrong between scheduling and export.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {what} = {value} (limit {limit})")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("degenerate ground state at B = {field} (gap {gap:e}); choose B strictly inside a zone")]
    DegenerateGroundState { field: f64, gap: f64 },

    #[error("qubit-count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("incomplete coverage: {} missing (pair, basis) cells, first: {}", .0.len(), .0.first().map(|s| s.as_str()).unwrap_or("-"))]
    IncompleteCoverage(Vec<String>),

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("unknown layer `{0}`")]
    UnknownLayer(String),

    #[error("calibration mismatch: {0}")]
    CalibrationMismatch(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
