use thiserror::Error;

use crate::trajectory::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The optimisation problem has no minimiser for the requested data.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// A Lienard system definition violates one of the limit-cycle conditions.
    #[error("invalid system: {0}")]
    Validation(String),

    /// Malformed input data (mismatched lengths, unordered times, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The step budget ran out; `partial` holds everything integrated so far.
    #[error("integration failed at t = {t} after {steps} steps")]
    IntegrationFailed {
        t: f64,
        steps: usize,
        partial: Box<Trajectory>,
    },

    #[error("no section crossing found before t = {t_max}")]
    EventNotFound { t_max: f64 },

    #[error("limit cycle not found: {0}")]
    CycleNotFound(String),

    #[error("singular force: {0}")]
    SingularForce(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationFailed { .. }
                | Error::EventNotFound { .. }
                | Error::CycleNotFound(_)
                | Error::SingularForce(_)
                | Error::Numerical(_)
        )
    }
}
