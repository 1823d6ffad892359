use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifold parameters: {0}")]
    InvalidManifold(String),

    #[error("point does not belong to {manifold}: {reason}")]
    ShapeMismatch { manifold: String, reason: String },

    #[error("constraint violation: {what} residual {residual:.3e} exceeds {tol:.1e}")]
    ConstraintViolation {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("cannot project onto manifold: {0}")]
    Projection(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation not supported on {manifold}: {what}")]
    Unsupported { manifold: String, what: String },

    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),

    #[error(
        "no Monte-Carlo hits for {what}; increase the number of paths or the window width (eps)"
    )]
    NoHits { what: String },

    #[error("kernel does not cover the requested pair: {0}")]
    UncoveredPair(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
