//! Annual DICE-style climate-economy model with carbon dioxide removal and
//! solar geoengineering as policy instruments.
//!
//! [`ModelParams`] loads a five-year calibration and converts it to a
//! one-year step. [`optimizer`] simulates and optimizes control paths,
//! [`metrics`] derives prices and welfare measures, and [`scenarios`] runs
//! manifests of portfolios and sensitivity cases.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annualize;
pub mod calibration;
pub mod climate;
pub mod economy;
pub mod error;
pub mod lbfgsb;
pub mod metrics;
pub mod optimizer;
pub mod params;
pub mod scenarios;

pub use climate::ClimateState;
pub use economy::{Controls, EconState, YearFlows};
pub use error::{Error, Result};
pub use metrics::ScenarioSummary;
pub use optimizer::{
    optimize, optimize_cea, optimize_with, simulate, CeaOutcome, ControlPath, Diagnostics, Mode, OptimizeOptions,
    Overrides, ScenarioConfig, Solution, Trajectory,
};
pub use params::{load_params, ClimateParams, EconParams, ExogenousPaths, ModelParams};
pub use scenarios::{run_manifest, RunManifest, SensitivityScenario};
