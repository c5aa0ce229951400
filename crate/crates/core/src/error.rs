use thiserror::Error;

/// Errors produced by the integrator, the models and the stability routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated an operation's preconditions.
    #[error("invalid argument: {0}")]
    Precondition(String),

    /// A quantity has no real value for the given parameters
    /// (for example a Hopf frequency when `lambda / delta <= mu^2`).
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrator produced a non-finite state.
    #[error("numerical failure: non-finite state at t = {time}")]
    NumericalFailure { time: f64 },

    /// Dense evaluation was requested outside the covered interval.
    #[error("t = {t} is outside the covered interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// Newton iteration did not reach the residual tolerance.
    #[error("root iteration did not converge after {iterations} iterations (|R| = {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The residual derivative vanished at an iterate.
    #[error("singular residual derivative at r = {re} + {im}i")]
    SingularDerivative { re: f64, im: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalFailure { .. }
                | Error::NonConvergence { .. }
                | Error::SingularDerivative { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
