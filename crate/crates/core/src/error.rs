use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("stabilizers do not mutually commute")]
    NonCommuting,

    #[error("joint eigenspace is not one-dimensional (projector trace {0:.6})")]
    DegenerateEigenspace(f64),

    #[error("matrix too ill-conditioned to invert (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("integrator stability guard violated: dt*gamma*|c'c| = {0:.3} > 0.1")]
    Unstable(f64),

    #[error("config error in field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
