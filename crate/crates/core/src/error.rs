use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The call is inconsistent with the problem it was given (wrong variant,
    /// mismatched grids, etc.).
    #[error("usage error: {0}")]
    Usage(String),
    /// A boundary value problem could not be built from the problem statement.
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Error)]
pub enum SolveError {
    #[error(
        "Newton did not converge after {iterations} iterations (last residual {:.3e})",
        residual_history.last().copied().unwrap_or(f64::NAN)
    )]
    NoConvergence {
        iterations: usize,
        last_iterate: Vec<f64>,
        residual_history: Vec<f64>,
    },
    #[error("stationary condition could not be solved for u at t = {t}")]
    Stationarity { t: f64 },
    #[error("denominator of the expanded dynamics vanishes at t = {t}")]
    VanishingDenominator { t: f64 },
    #[error("terminal time iterate {t_final} is not admissible")]
    Horizon { t_final: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("singular shooting Jacobian")]
    SingularJacobian,
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
