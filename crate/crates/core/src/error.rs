use thiserror::Error;

/// Errors raised by graph construction, validation and the analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {0} is out of range")]
    UnknownVertex(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("radius of vertex {vertex} must be positive, got {value}")]
    NonPositiveRadius { vertex: usize, value: f64 },

    #[error("invalid packing: {0}")]
    InvalidPacking(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("vertex {0} is on the boundary; its angle sum is not constrained")]
    BoundaryVertex(usize),

    #[error("linear program is malformed: {0}")]
    MalformedProgram(String),

    #[error("linear program solver broke down: {0}")]
    LpBreakdown(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("iteration did not converge after {iterations} sweeps (worst residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no root in range: {0}")]
    NoRoot(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
