use thiserror::Error;

use crate::moments::GasStatistics;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "tolerance not reached after {subdivisions} subdivisions: best estimate {value} (im {value_im}), error {error_estimate:e}"
    )]
    ToleranceNotReached {
        value: f64,
        value_im: f64,
        error_estimate: f64,
        subdivisions: usize,
    },
    #[error("invalid integrand: non-finite value at x = {abscissa}")]
    InvalidIntegrand { abscissa: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("pole {pole} must lie strictly inside ({a}, {b})")]
    PoleOutsideInterval { pole: f64, a: f64, b: f64 },
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error(
        "alpha = {alpha} is outside the supported window [{lo}, {hi}] for {statistics} statistics"
    )]
    AlphaOutOfWindow {
        alpha: f64,
        statistics: GasStatistics,
        lo: f64,
        hi: f64,
    },

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The boundary value of the dispersion function left the closed upper
    /// half-plane, so the phase branch convention no longer applies.
    #[error("Im lambda+({mu}) = {imaginary} < 0: phase branch convention violated")]
    BranchViolation { mu: f64, imaginary: f64 },

    #[error("phase table did not converge: {0}")]
    TableConstruction(String),
}

impl Error {
    /// True when the failure is numerical rather than a bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(QuadratureError::ToleranceNotReached { .. })
                | Error::Quadrature(QuadratureError::InvalidIntegrand { .. })
                | Error::TableConstruction(_)
                | Error::BranchViolation { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
