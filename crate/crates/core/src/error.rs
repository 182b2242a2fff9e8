use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation: k = {k} requires dimension n > k (got n = {n})")]
    InvalidTruncation { k: usize, n: usize },

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("constraint violation: input vector has norm {norm}, expected unit norm")]
    NonUnitVector { norm: f64 },

    #[error("degenerate pencil: {0}")]
    DegeneratePencil(String),

    #[error("{lambda} is not an eigenvalue of the pencil")]
    NotAnEigenvalue { lambda: f64 },

    #[error("singular argument: lambda = {lambda} is an eigenvalue, operator not invertible")]
    SingularArgument { lambda: f64 },

    #[error("degenerate differential at (lambda, x) = ({lambda}, .): eigenpoint is not simple")]
    DegenerateDifferential { lambda: f64 },

    #[error("transversality (H3) fails at lambda = {lambda}: cannot form the splitting")]
    TransversalityFailed { lambda: f64 },

    #[error("interval ({alpha}, {beta}) does not isolate lambda = {lambda}")]
    NonIsolatingInterval { lambda: f64, alpha: f64, beta: f64 },

    #[error("endpoint {lambda} collides with an eigenvalue")]
    EndpointCollision { lambda: f64 },

    #[error("epsilon perturbation exhausted after {halvings} halvings at lambda = {lambda}")]
    EpsilonExhausted { lambda: f64, halvings: usize },

    #[error("perturbation mismatch: {0}")]
    PerturbationMismatch(String),

    #[error("unsupported map: {0}")]
    UnsupportedMap(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("conic fit failed: {0}")]
    FitError(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
