use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A trait value fell outside the declared domain of a bounded family.
    #[error("trait {which} = {value} outside domain [{lo}, {hi}]")]
    DomainViolation {
        which: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// The interaction terms vanish and the interior cubic carries no information.
    #[error("degenerate model: {0}")]
    DegenerateNoInteraction(&'static str),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("trajectory is not oscillating")]
    NotOscillating,
    #[error("operation requires the gaussian trait family")]
    RequiresGaussian,
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("config error at {key}: {reason}")]
    Config { key: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors that stem from the configuration rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam { .. } | Error::Config { .. } | Error::RequiresGaussian | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
