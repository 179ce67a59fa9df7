use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("constraint violated: {what} off by {violation:e} (tolerance {tolerance:e})")]
    Constraint {
        what: &'static str,
        violation: f64,
        tolerance: f64,
    },

    #[error("index {index} is not an interior sample of a curve with {len} samples")]
    Index { index: usize, len: usize },

    #[error("tangent vector of norm {norm} lies outside the exponential domain (bound {bound})")]
    OutOfExpDomain { norm: f64, bound: f64 },

    #[error("endpoints coincide; the Dirichlet problem is degenerate")]
    DegenerateEndpoints,

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("invalid input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
