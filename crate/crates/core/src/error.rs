use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument {x} exceeds the supported range (x <= {limit}) for order {nu}")]
    ArgumentTooLarge { nu: f64, x: f64, limit: f64 },

    #[error("no convergence in {what}: {detail}")]
    NoConvergence { what: &'static str, detail: String },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("A_lambda is singular on the complement: |1 - lambda/Lambda| = {gap:e} at entry {index}")]
    SingularOperator { index: usize, gap: f64 },

    #[error("reduced minimizer sits at the boundary of the search interval (t = {t})")]
    BoundaryMinimizer { t: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
