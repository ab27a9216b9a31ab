use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("t = {t} is outside the trajectory range [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("level r = {r} is outside (0, mu) with mu = {mu}")]
    Domain { r: f64, mu: f64 },

    #[error("conjugate solver did not converge at x = {x} (residual {residual:e})")]
    ConvergenceFailure { x: f64, residual: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
