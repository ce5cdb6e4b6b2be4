use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("non-finite integrand value at s = {s}")]
    NonFinite { s: f64 },

    #[error("quadrature failed to reach tolerance {tol:e} on [{a}, {b}] (estimated error {estimate:e})")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        tol: f64,
        estimate: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument {y} lies below the increasing branch of M_log (minimum {minimum} at a = {branch_start})")]
    BelowBranch {
        y: f64,
        minimum: f64,
        branch_start: f64,
    },

    #[error("t = {t} does not exceed the threshold T' = {t_prime}")]
    BelowThreshold { t: f64, t_prime: f64 },

    #[error("truncation time {required} exceeds the cap {cap}; best achievable bound there is {achievable:e}")]
    TruncationCap {
        required: f64,
        cap: f64,
        achievable: f64,
    },

    #[error("t = {t} lies beyond the represented range of A (valid up to {limit})")]
    Range { t: f64, limit: f64 },

    #[error("tail of A beyond t = {t} is not available: {reason}")]
    TailUnavailable { t: f64, reason: String },

    #[error("contour quadrature needs at least {required} panels on {piece}, budget is {budget}")]
    ContourBudget {
        piece: &'static str,
        required: usize,
        budget: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing limit value f(0): {0}")]
    MissingLimit(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
