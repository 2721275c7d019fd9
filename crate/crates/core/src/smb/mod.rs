//! Skew systems over the boundary and random-walk shifts, and the
//! equipartition experiments built on them.

mod experiments;
mod sequences;
mod system;

use thiserror::Error;

use crate::actions::ActionError;
use crate::boundary::BoundaryError;
use crate::measure::MeasureError;
use crate::words::WordError;

pub use experiments::{
    ExceedanceRow, MaximalReport, PreservationReport, RokhlinResult, RwReport, Sampling, SewardReport,
};
pub use sequences::{CesaroReport, InfoSequence};
pub use system::{derive_seed, BasePoint, Cocycle, SkewSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmbError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("horizon {requested} exceeds the sampled base length {available}")]
    HorizonTooLong { requested: usize, available: usize },
    #[error("horizon {horizon} is infeasible ({reason}); largest feasible horizon is {feasible}")]
    InfeasibleHorizon { horizon: usize, feasible: usize, reason: String },
    #[error("expected a {expected} system, found {found}")]
    WrongCocycle { expected: &'static str, found: &'static str },
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("{0}")]
    InvalidParameter(String),
    #[error("worker pool: {0}")]
    Workers(String),
}

/// Sufficient condition under which the estimates converge to a constant.
pub const ERGODICITY_NOTE: &str = "Limits are constant when the skew product is ergodic. That holds when the fiber \
action is strongly mixing and the cocycle is class-injective over an essentially free base. Ergodicity is assumed, \
not verified. Z-factor fibers are not mixing as free-group actions, so their results are exploratory.";

#[cfg(test)]
mod tests;
