use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature on [{a}, {b}] did not converge within {intervals} intervals")]
    QuadratureDiverged { a: f64, b: f64, intervals: usize },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("fuel constraint violated: residual inventory {residual:e} exceeds tolerance {tolerance:e}")]
    FuelConstraint { residual: f64, tolerance: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("path {index}: {source}")]
    Path { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Error::InvalidParameter { .. } | Error::InvalidGrid(_) | Error::RegimeMismatch(_) => true,
            Error::Path { source, .. } => source.is_invalid_input(),
            _ => false,
        }
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn require_nonneg(name: &'static str, value: f64) -> Result<f64> {
    require_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::param(name, format!("must be >= 0, got {value}")));
    }
    Ok(value)
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    require_finite(name, value)?;
    if value <= 0.0 {
        return Err(Error::param(name, format!("must be > 0, got {value}")));
    }
    Ok(value)
}
