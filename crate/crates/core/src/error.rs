use thiserror::Error;

pub type Result<T, E = FlowError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: String, t: Option<f64> },

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("grid mismatch: expected {expected} nodes, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("eta 2-forms are linearly dependent, not a frame of the fibre 2-forms")]
    NotAFrame,

    #[error("non-finite values produced at t = {t}")]
    UnstableStep { t: f64 },

    #[error("gauge map is not strictly increasing near node {node}")]
    NonMonotone { node: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl FlowError {
    pub(crate) fn not_pd(context: impl Into<String>) -> Self {
        FlowError::NotPositiveDefinite { context: context.into(), t: None }
    }

    /// Attaches the flow time to errors that carry one.
    pub fn at_time(self, time: f64) -> Self {
        match self {
            FlowError::NotPositiveDefinite { context, .. } => {
                FlowError::NotPositiveDefinite { context, t: Some(time) }
            }
            FlowError::UnstableStep { .. } => FlowError::UnstableStep { t: time },
            other => other,
        }
    }
}

impl From<std::io::Error> for FlowError {
    fn from(e: std::io::Error) -> Self {
        FlowError::Io(e.to_string())
    }
}
