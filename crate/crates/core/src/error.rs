//! Error type shared by all library modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix is numerically singular (|det| = {det_abs:.3e})")]
    SingularMatrix { det_abs: f64 },

    #[error("index {index} outside coefficient window [{lo}, {hi}]")]
    WindowOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("time {t} outside window [{lo}, {hi}]")]
    TimeOutOfWindow { t: f64, lo: f64, hi: f64 },

    #[error("initial state must be nonzero")]
    ZeroInitialState,

    #[error("coefficients are not {period}-periodic on the checked window: {detail}")]
    NonPeriodicInput { period: String, detail: String },

    #[error("initial states do not match the shared-state convention: {0}")]
    MismatchedInitialState(String),

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("depth {depth} exceeds the continued-fraction budget: {detail}")]
    DepthOverflow { depth: usize, detail: String },

    #[error("no convergent is accurate enough: {0}")]
    PrecisionBudget(String),

    #[error("measure must be nonnegative: {0}")]
    NegativeMeasure(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("envelope constants rejected: {0}")]
    EnvelopeViolation(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
