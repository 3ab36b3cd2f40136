//! Trajectory simulation and direct-transcription optimization of the
//! control path.
//!
//! Every control for every year is one decision variable. Gradients come from
//! a reverse (adjoint) sweep through the simulator; [`finite_difference_gradient`]
//! is the independent check.

mod config;
mod simulate;
mod solve;

pub use config::{Mode, Overrides, ScenarioConfig, MU_MAX, SRM_MAX, TERMINAL_SAVINGS_YEARS, TERMINAL_TAIL_YEARS};
pub use simulate::{finite_difference_gradient, simulate, ControlPath, Model, Sensitivities, Trajectory};
pub use solve::{
    optimize, optimize_cea, optimize_with, perturb_sg, CeaOutcome, Diagnostics, OptimizeOptions, Solution,
};
