use thiserror::Error;

/// Errors raised by the geometry kernel and everything built on it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("tangent vector is based at a different point than the one supplied")]
    BaseMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point is off the manifold (residual {residual:.3e})")]
    OffManifold { residual: f64 },

    #[error("tangent vector leaves the tangent space (residual {residual:.3e})")]
    OffTangent { residual: f64 },

    #[error("step of length {norm:.6} exceeds the injectivity radius {limit:.6}")]
    OutOfInjectivity { norm: f64, limit: f64 },

    #[error("inverse exponential map undefined between these points")]
    UndefinedLog,

    #[error("parallel transport undefined between these points")]
    UndefinedTransport,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("manifold mismatch: {0}")]
    ManifoldMismatch(String),

    #[error("geodesic averaging failed: {0}")]
    Averaging(String),

    #[error("problem construction failed: {0}")]
    Construction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
