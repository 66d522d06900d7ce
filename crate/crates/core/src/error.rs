use thiserror::Error;

use crate::integrate::PhaseState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("point {x} lies outside the domain {domain}")]
    OutOfDomain { x: f64, domain: &'static str },

    /// A step produced NaN or infinity. Carries the last finite state.
    #[error("non-finite value encountered during integration")]
    NonFinite { state: Box<PhaseState> },

    #[error("symmetric eigen-decomposition failed")]
    Eigen,

    #[error("no candidates detected from any start")]
    NoCandidates,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
