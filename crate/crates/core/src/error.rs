use thiserror::Error;

use crate::solver::ConvergenceReport;
use crate::spectrum::SpectrumResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("derivative at the fixed point {t} is not declared and the lattice limit did not stabilize")]
    FixedPointDerivativeUnavailable { t: f64 },

    #[error("Jackson-Norlund series did not stabilize after {terms} terms")]
    SeriesDivergence { terms: usize },

    #[error("series cancellation ratio {cancellation:e} exceeds {threshold:e}; the value has no trustworthy digits")]
    PrecisionLoss { cancellation: f64, threshold: f64 },

    #[error("no sign change found for zero #{n} in [{lo}, {hi}]")]
    ZeroNotBracketed { n: usize, lo: f64, hi: f64 },

    #[error("Picard iteration did not converge after {iterations} sweeps (last change {final_delta:e})")]
    NoConvergence {
        iterations: usize,
        final_delta: f64,
        report: Box<ConvergenceReport>,
    },

    #[error("eigenvalue #{n} needs series magnitude {magnitude:e}, beyond the 64-bit budget {budget:e}")]
    PrecisionBudgetExceeded { n: usize, magnitude: f64, budget: f64 },

    #[error("characteristic function dips below its noise floor near lambda = {near} without a sign change")]
    MissedRootSuspected { near: f64, partial: Box<SpectrumResult> },

    #[error("finite-difference derivative at lambda = {lambda} is unstable (full step {full:e}, half step {half:e})")]
    DerivativeStepUnstable { lambda: f64, full: f64, half: f64 },
}
