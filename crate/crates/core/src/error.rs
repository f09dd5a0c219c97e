use thiserror::Error;

use crate::geometry::CurveSample;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid model setup: {0}")]
    InvalidSetup(String),

    #[error("fixed points on the cycle need a positive integer kick period, got tau = {0}")]
    NonIntegerTau(f64),

    #[error("kick amplitude is zero; no fold can develop")]
    ZeroAmplitude,

    #[error("orbit left the guard region at step {step} (theta = {theta}, |y| = {y_norm})")]
    NonFiniteState { step: u64, theta: f64, y_norm: f64 },

    #[error("circle map with 2*pi*B = {0} >= 1 is not invertible; rotation number undefined")]
    NotInvertible(f64),

    #[error("curve refinement hit the point budget of {budget} samples")]
    PointBudgetExceeded {
        budget: usize,
        partial: Box<CurveSample>,
    },

    #[error("graph transform did not converge in {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("matrix dimension {0} exceeds the supported maximum of 16")]
    DimensionTooLarge(usize),

    #[error("matrix is singular or not finite")]
    SingularLambda,

    #[error("nothing to plot")]
    EmptyData,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status for the command-line tool: 2 for bad input, 3 when
    /// an orbit trips the numerical guard, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::InvalidSetup(_)
            | Error::NonIntegerTau(_)
            | Error::ZeroAmplitude
            | Error::NotInvertible(_)
            | Error::DimensionTooLarge(_)
            | Error::SingularLambda => 2,
            Error::NonFiniteState { .. } => 3,
            _ => 1,
        }
    }
}
