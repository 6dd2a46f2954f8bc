//! Nonlinear evolution, the Picard iterator and run diagnostics.

mod diagnostics;
mod etd;
mod picard;
mod rhs;

pub use diagnostics::{check_positivity, detect_blowup, BlowupStatus, PositivityReport, Violation, TAIL_FRACTION};
pub use etd::{
    dt_max, evolve, Formulation, NormRecord, RunStatus, Scheme, SolverConfig, Trajectory, DEFAULT_BLOWUP_FACTOR,
    DEFAULT_POSITIVITY_TOL,
};
pub use picard::{picard_solve, PicardConfig, PicardResult};
pub use rhs::{nonlinear_rhs, nonlinear_rhs_with_sensitivity, perturbation_rhs, perturbation_rhs_dealiased, DriftOperator};

use crate::grid::GridError;
use crate::norms::NormError;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Norm(#[from] NormError),
}
