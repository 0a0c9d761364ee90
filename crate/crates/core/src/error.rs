use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("unknown level {0}")]
    UnknownLevel(String),

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("equilibrium search did not converge (gradient norm {residual:.3e} after {iterations} iterations)")]
    Convergence { residual: f64, iterations: usize },

    #[error("chain is unstable: mode {mode} has squared frequency {omega_sq:.6e} MHz^2")]
    Instability { mode: String, omega_sq: f64 },

    #[error("propagation failed at t = {time:.6e} us: {reason}")]
    Propagation { time: f64, reason: String },

    #[error("pulse design failed: {0}")]
    Design(String),

    #[error("iteration {iteration}: {source}")]
    Protocol {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
