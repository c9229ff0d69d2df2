use thiserror::Error;

use crate::solvers::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {point:?} lies outside {what}")]
    OutsideDomain { point: Vec<f64>, what: &'static str },

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("singular {what} matrix")]
    SingularMatrix { what: &'static str },

    #[error("source iteration did not converge in {} iterations (last update {:.3e})", .report.iterations, .report.final_update)]
    NotConverged { report: Box<SolveReport> },

    #[error("diffusion solve stalled after {iterations} iterations (relative residual {residual:.3e})")]
    DiffusionSolve { iterations: usize, residual: f64 },

    #[error("periodic sweep did not settle after {passes} passes")]
    PeriodicSweep { passes: usize },

    #[error("filter support around {point:?} leaves the non-periodic domain")]
    FilterSupport { point: Vec<f64> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
