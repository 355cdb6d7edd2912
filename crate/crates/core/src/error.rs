use thiserror::Error;

/// A violated parameter invariant. Each invariant has its own variant so
/// callers can match on the exact cause.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("rate `{name}` must be finite, got {value}")]
    NonFiniteRate { name: &'static str, value: f64 },
    #[error("rate `{name}` must be nonnegative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("rate `{name}` must be strictly positive")]
    ZeroRate { name: &'static str },
    #[error("power capacity M must be positive and finite, got {0}")]
    NonPositivePower(f64),
    #[error("power capacity M={m} exceeds the number of parking spaces K={k}")]
    PowerExceedsSpaces { m: f64, k: u32 },
    #[error("number of parking spaces K must be at least 1")]
    NoSpaces,
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{0} requires a finite number of parking spaces")]
    InfiniteSpaces(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Numerical { residual: f64, tolerance: f64 },
    #[error("singular linear system at level {level}")]
    Singular { level: usize },
    #[error("diagnostic: {0}")]
    Diagnostic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::InfiniteSpaces(_) | Error::Domain(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
