use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error(
        "matrix is not symmetric: max |A - A^T| = {deviation:e} exceeds tolerance {tolerance:e}"
    )]
    AsymmetricInput { deviation: f64, tolerance: f64 },

    #[error("odd dimension {0}: hafnians are defined for even n only")]
    OddDimension(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(
        "eigensolver did not converge for a {size}x{size} matrix after {iterations} iterations"
    )]
    NoConvergence { size: usize, iterations: usize },

    #[error("Hessenberg recurrence broke down: {0}")]
    DegenerateHessenberg(String),

    #[error("input of size {size} exceeds the brute-force limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("expansion needs {required} coefficients, budget is {budget}")]
    CapacityExceeded { required: u128, budget: u128 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient data: {found} points, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("reference value is zero, percentage error undefined")]
    DivisionByZeroReference,

    #[error("wall-clock budget of {budget_seconds} s exceeded")]
    BudgetExceeded { budget_seconds: f64 },

    #[error("unknown benchmark family '{0}'")]
    BadFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
