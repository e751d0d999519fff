//! Crate-wide error type.

use thiserror::Error;

/// Errors returned by model validation and region/optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    /// One or more channel-model invariants are violated. Each entry
    /// describes a single violation.
    #[error("invalid channel model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    /// One or more power-allocation invariants are violated.
    #[error("invalid power allocation: {}", .0.join("; "))]
    InvalidAllocation(Vec<String>),

    /// A rate vector has the wrong shape or negative/non-finite entries.
    #[error("invalid rate vector: {}", .0.join("; "))]
    InvalidRates(Vec<String>),

    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is defined only for a specific number of states.
    #[error("operation requires {expected} channel states, model has {actual}")]
    WrongStateCount { expected: usize, actual: usize },

    /// The operation is defined only for symmetric allocations.
    #[error("operation requires a symmetric power allocation")]
    AsymmetricAllocation,

    /// The grid resolution does not divide 1 into an integer number of steps.
    #[error("grid resolution {0} is not in (0, 1] with integer 1/resolution")]
    GridResolution(f64),

    /// A stream or state index is out of range.
    #[error("index out of range: {0}")]
    IndexRange(String),

    /// Two objects that must share a shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The linear objective is unbounded over the region.
    #[error("objective unbounded over the region: {0}")]
    Unbounded(String),

    /// The baseline grouping requires zero power on the cross and top layers.
    #[error("baseline grouping requires zero power on cross/top layers: {0}")]
    NonzeroUpperLayers(String),

    /// Rates fail the achievability check that gates a simulation.
    #[error("rates not achievable at this allocation: {}", .0.join("; "))]
    InfeasibleRates(Vec<String>),

    /// A simulation was configured with zero trials.
    #[error("simulation requires at least one trial")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
