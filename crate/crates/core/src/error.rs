use thiserror::Error;

/// Errors surfaced by the library. Support violations are not errors: they
/// produce [`crate::Value::Infinite`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("trace {trace} outside the allowed range for a {mode} state")]
    Trace { trace: f64, mode: &'static str },
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter { name: &'static str, value: f64, reason: &'static str },
    #[error("singular operator: {0}")]
    Singular(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("malformed input at `{pointer}`: {message}")]
    Parse { pointer: String, message: String },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { pointer: pointer.into(), message: message.into() }
    }

    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Parameter { name, value, reason }
    }
}
