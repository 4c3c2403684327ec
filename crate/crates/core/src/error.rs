use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("matrix is numerically singular")]
    SingularInput,

    #[error("evaluation point {distance:e} away from a pole")]
    PoleTooClose { distance: f64 },

    #[error("GAP volume {volume} exceeds cap {cap}")]
    CapExceeded { volume: u128, cap: u128 },

    #[error("exact enumeration over {len} atoms exceeds the limit of {limit}")]
    TooLarge { len: usize, limit: usize },

    #[error("reference bin {bin} has no mass; reduce the bin count")]
    EmptyBin { bin: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
