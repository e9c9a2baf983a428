use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("need at least {needed} observations, have {have}")]
    InsufficientData { needed: u64, have: u64 },

    #[error("case {case} requires the known value of `{field}`")]
    MissingKnown { case: &'static str, field: &'static str },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDegreesOfFreedom(f64),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
