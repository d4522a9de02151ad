use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not reach tolerance {tolerance:e} within {evaluations} evaluations (estimate {estimate:e})")]
    QuadratureBudget { tolerance: f64, evaluations: usize, estimate: f64 },

    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("time {t:e} outside generator table range [0, {t_max:e}]")]
    OutOfTable { t: f64, t_max: f64 },

    #[error("fit did not converge after {iterations} iterations")]
    FitDiverged { iterations: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
