use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("behavior is signaling (deficit {deficit:e} exceeds tolerance {tolerance:e})")]
    Signaling { deficit: f64, tolerance: f64 },

    #[error("invalid basis label {0:?}")]
    InvalidBasisLabel(String),

    #[error("state has no nonzero amplitude")]
    ZeroState,

    #[error("zero vector cannot define a projector")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("negative probability {value:e} at {location}")]
    NegativeProbability { value: f64, location: String },

    #[error("invalid functional: {0}")]
    InvalidFunctional(String),

    #[error("identity certificate failed: {0}")]
    DecompositionFailed(String),

    #[error("invalid polytope description: {0}")]
    InvalidPolytope(String),

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("linear program certificate check failed: {0}")]
    Certificate(String),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
