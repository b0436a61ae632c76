//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, dynamics, optimization and design.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter set violates a builder's contract (wrong sign, foreign
    /// nonzero field, bad dimension, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The adaptive integrator could not continue; carries the time reached.
    #[error("integration failed at t = {t_reached}: step size underflow")]
    StepSizeUnderflow { t_reached: f64 },

    /// Emission budgets need at least one decay channel.
    #[error("no decay channel: kappa and gamma are both zero")]
    NoDecayChannel,

    /// The steady-state budget requires a strictly stable matrix.
    #[error("matrix is marginally stable: max Im eigenvalue = {max_im}")]
    MarginallyStable { max_im: f64 },

    /// Polarisation purity is undefined without cavity emission.
    #[error("polarisation purity undefined: no cavity emission")]
    UndefinedPurity,

    /// An optimization objective returned NaN or infinity.
    #[error("objective returned a non-finite value at {at:?}")]
    NonFiniteObjective { at: Vec<f64> },

    /// An accessor was asked for a quantity that does not exist for the
    /// given rates (e.g. cooperativity with kappa*gamma = 0).
    #[error("degenerate rates: {0}")]
    DegenerateRates(String),

    /// The requested iso-efficiency target cannot be met anywhere in the
    /// probed length range.
    #[error("efficiency target {target} unreachable over the probed lengths")]
    Infeasible { target: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
