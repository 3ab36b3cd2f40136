use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::output::{csv_bytes, write_atomic, SummaryRow, TrajectoryRow};
use super::{RunManifest, ScenarioSpec};
use crate::error::{Error, Result};
use crate::metrics::{self, ScenarioSummary};
use crate::optimizer::{
    optimize_cea, optimize_with, CeaOutcome, Diagnostics, Mode, Model, OptimizeOptions, Overrides, ScenarioConfig,
    Solution, Trajectory,
};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioStatus {
    Converged,
    /// The temperature cap cannot be met; outputs describe the closest path.
    Infeasible,
    /// Iteration cap reached; outputs describe the best path found. Also used
    /// when the scenario's baseline did not converge, in which case no outputs
    /// are written.
    NotConverged,
    Failed(String),
}

impl ScenarioStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::Infeasible => "infeasible",
            Self::NotConverged => "not-converged",
            Self::Failed(_) => "failed",
        }
    }
}

/// A solved manifest entry.
#[derive(Debug, Clone)]
pub enum SolvedScenario {
    Optimal(Box<Solution>),
    Infeasible {
        closest: Box<Trajectory>,
        min_max_violation: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub name: String,
    pub status: ScenarioStatus,
    pub diagnostics: Option<Diagnostics>,
    pub summary: Option<ScenarioSummary>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub results: Vec<ScenarioResult>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.results
            .iter()
            .all(|r| matches!(r.status, ScenarioStatus::Converged | ScenarioStatus::Infeasible))
    }

    pub fn result(&self, name: &str) -> Option<&ScenarioResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// Optimizes one manifest entry.
pub fn solve_scenario(spec: &ScenarioSpec, params: &ModelParams, opts: &OptimizeOptions) -> Result<SolvedScenario> {
    let config = spec.config();
    match config.mode {
        Mode::Cba => Ok(SolvedScenario::Optimal(Box::new(optimize_with(&config, params, opts)?))),
        Mode::Cea { .. } => Ok(match optimize_cea(&config, params, opts)? {
            CeaOutcome::Feasible(s) => SolvedScenario::Optimal(s),
            CeaOutcome::Infeasible {
                min_max_violation,
                closest,
            } => SolvedScenario::Infeasible {
                closest,
                min_max_violation,
            },
        }),
    }
}

fn overrides_key(o: &Overrides) -> String {
    format!("{o:?}")
}

fn portfolio(config: &ScenarioConfig) -> &'static str {
    config.label()
}

fn mode_label(config: &ScenarioConfig) -> String {
    match config.mode {
        Mode::Cba => "cba".to_string(),
        Mode::Cea { t_cap } => format!("cea-{t_cap}"),
    }
}

struct BaselineFailure {
    message: String,
    convergence: bool,
}

struct Outputs {
    result: ScenarioResult,
    log: String,
}

#[allow(clippy::too_many_arguments)]
fn write_outputs(
    dir: &Path,
    spec: &ScenarioSpec,
    model: &Model<'_>,
    traj: &Trajectory,
    baseline: &Trajectory,
    status: &ScenarioStatus,
    violation: Option<f64>,
    seed: u64,
) -> Result<ScenarioSummary> {
    let config = spec.config();
    let summary = metrics::summarize(model, traj, baseline);
    let rows = TrajectoryRow::rows(traj, &summary.carbon_tax, &summary.scc, seed);
    write_atomic(&dir.join("trajectory.csv"), &csv_bytes(&rows)?)?;
    let row = SummaryRow::new(
        &spec.name,
        portfolio(&config),
        mode_label(&config),
        spec.sensitivity.map(|s| s.to_string()).unwrap_or_default(),
        status.label(),
        &summary,
        traj,
        violation,
        seed,
    );
    write_atomic(&dir.join("summary.csv"), &csv_bytes(&[row])?)?;
    Ok(summary)
}

fn run_one(
    spec: &ScenarioSpec,
    params: &ModelParams,
    opts: &OptimizeOptions,
    baseline: std::result::Result<&Solution, &BaselineFailure>,
    out: &Path,
) -> Result<Outputs> {
    let config = spec.config();
    let dir = out.join(&spec.name);
    let baseline = match baseline {
        Ok(b) => b,
        Err(BaselineFailure {
            message: msg,
            convergence,
        }) => {
            let status = if *convergence {
                ScenarioStatus::NotConverged
            } else {
                ScenarioStatus::Failed(format!("baseline: {msg}"))
            };
            return Ok(Outputs {
                log: format!("{}: {}, baseline unavailable: {msg}", spec.name, status.label()),
                result: ScenarioResult {
                    name: spec.name.clone(),
                    status,
                    diagnostics: None,
                    summary: None,
                    output_dir: None,
                },
            });
        }
    };
    let model = Model::new(params, &config);
    let (traj, status, diagnostics, violation) = match solve_scenario(spec, params, opts) {
        Ok(SolvedScenario::Optimal(s)) => {
            let v = s.diagnostics.max_violation;
            (s.trajectory, ScenarioStatus::Converged, Some(s.diagnostics), v)
        }
        Ok(SolvedScenario::Infeasible {
            closest,
            min_max_violation,
        }) => (*closest, ScenarioStatus::Infeasible, None, Some(min_max_violation)),
        Err(Error::NonConvergence(nc)) => {
            let traj = model.run(&nc.controls, None)?;
            let v = nc.diagnostics.max_violation;
            (traj, ScenarioStatus::NotConverged, Some(nc.diagnostics), v)
        }
        Err(e @ (Error::Io { .. } | Error::Csv(_))) => return Err(e),
        Err(e) => {
            return Ok(Outputs {
                log: format!("{}: failed: {e}", spec.name),
                result: ScenarioResult {
                    name: spec.name.clone(),
                    status: ScenarioStatus::Failed(e.to_string()),
                    diagnostics: None,
                    summary: None,
                    output_dir: None,
                },
            })
        }
    };
    let summary = write_outputs(
        &dir,
        spec,
        &model,
        &traj,
        &baseline.trajectory,
        &status,
        violation,
        opts.seed,
    )?;
    let mut log = format!("{}: {}", spec.name, status.label());
    match (&diagnostics, violation) {
        (Some(d), _) => write!(log, "; {d}").unwrap(),
        (None, Some(v)) => write!(log, "; smallest achievable cap violation {v:.3} degC").unwrap(),
        _ => {}
    }
    Ok(Outputs {
        log,
        result: ScenarioResult {
            name: spec.name.clone(),
            status,
            diagnostics,
            summary: Some(summary),
            output_dir: Some(dir),
        },
    })
}

/// Solves every manifest entry (concurrently) and writes, per scenario,
/// `<output_dir>/<name>/trajectory.csv` and `summary.csv`, plus one
/// `<output_dir>/run.log`. Baselines with matching overrides are solved
/// internally and shared.
pub fn run_manifest(manifest: &RunManifest, params: &ModelParams) -> Result<RunReport> {
    manifest.validate()?;
    let out = &manifest.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let probe = out.join(".write-probe");
    std::fs::write(&probe, b"").map_err(|e| Error::io(out, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;

    let opts = manifest.options();
    let mut keys: BTreeMap<String, Overrides> = BTreeMap::new();
    for s in &manifest.scenarios {
        let o = s.config().overrides;
        keys.insert(overrides_key(&o), o);
    }
    let baselines: BTreeMap<String, std::result::Result<Solution, BaselineFailure>> = keys
        .into_par_iter()
        .map(|(k, o)| {
            let config = ScenarioConfig::baseline().with_overrides(o);
            let solved = optimize_with(&config, params, &opts).map_err(|e| BaselineFailure {
                convergence: matches!(e, Error::NonConvergence(_)),
                message: e.to_string(),
            });
            (k, solved)
        })
        .collect();

    let outputs: Vec<Outputs> = manifest
        .scenarios
        .par_iter()
        .map(|spec| {
            let key = overrides_key(&spec.config().overrides);
            let base = baselines[&key].as_ref();
            run_one(spec, params, &opts, base, out)
        })
        .collect::<Result<_>>()?;

    let mut log = String::new();
    writeln!(log, "seed {}", manifest.seed).unwrap();
    writeln!(
        log,
        "params {}",
        manifest
            .params
            .as_ref()
            .map_or("bundled".to_string(), |p| p.display().to_string())
    )
    .unwrap();
    writeln!(
        log,
        "tolerances: projected gradient {:.1e}, cap {:.1e} degC; {} random starts",
        opts.pg_tolerance, opts.cap_tolerance, opts.multistarts
    )
    .unwrap();
    for (k, b) in &baselines {
        match b {
            Ok(s) => writeln!(log, "baseline {k}: {}", s.diagnostics).unwrap(),
            Err(e) => writeln!(log, "baseline {k}: {}", e.message).unwrap(),
        }
    }
    for o in &outputs {
        writeln!(log, "{}", o.log).unwrap();
    }
    write_atomic(&out.join("run.log"), log.as_bytes())?;

    Ok(RunReport {
        output_dir: out.clone(),
        results: outputs.into_iter().map(|o| o.result).collect(),
    })
}
