use crate::dynamics::StateVector;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("integration blew up at t = {at}: {reason}")]
    Blowup {
        at: f64,
        reason: String,
        /// Last state that passed the finiteness and magnitude checks.
        last_good: StateVector,
    },
    #[error("versor undefined: ||I|| = {norm} is below the exact-zero floor")]
    UndefinedVersor { norm: f64 },
    #[error("norm must be strictly positive, got {0}")]
    NonPositiveNorm(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
