use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("singular metric at chart node {node:?} (det g = {det:e})")]
    SingularMetric { node: Vec<f64>, det: f64 },

    #[error("map is not an immersion at {0:?}")]
    ImmersionFailure(Vec<f64>),

    #[error("patch has no integrable boundary: {0}")]
    NoBoundary(String),

    #[error("unknown catalog surface `{0}`")]
    UnknownSurface(String),

    #[error("bound `{bound}` requires a minimal submanifold but `{surface}` is not minimal")]
    NonMinimal { surface: String, bound: String },

    #[error("degenerate test function: {0}")]
    DegenerateFunction(String),

    #[error("positivity violated: f = {value:e} at {at:?}")]
    Positivity { value: f64, at: Vec<f64> },

    #[error("empty admissible family: {0}")]
    EmptyFamily(String),

    #[error("insufficient neighbours for gradient fit: need {needed}, have {have}")]
    InsufficientNeighbors { needed: usize, have: usize },

    #[error("ordering violated: {0}")]
    OrderingViolation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(String),
}

impl LabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::NonConvergence(_)
                | LabError::SingularMetric { .. }
                | LabError::ImmersionFailure(_)
        )
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
