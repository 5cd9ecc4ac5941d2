use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("fock cutoff {cutoff} too small, need at least {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("degenerate intermediate state {0} (vanishing energy denominator)")]
    DegenerateState(String),

    #[error("level tracking lost at Omega = {omega} (overlap {overlap:.3})")]
    TrackingLost { omega: f64, overlap: f64 },

    #[error("gap minimum at the boundary of the scanned interval (Omega = {0})")]
    MinimumAtBoundary(f64),

    #[error("ambiguous state identification (overlap {0:.3})")]
    AmbiguousState(f64),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("undefined correlation: <a^dag^n a^n> = {0:e}")]
    UndefinedCorrelation(f64),

    #[error("invalid configuration value for `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
