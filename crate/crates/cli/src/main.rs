//! `dicesg`: runs climate-policy scenarios and writes CSV results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicesg_core::optimizer::optimize_with;
use dicesg_core::scenarios::{
    solve_scenario, sweep_sg_scale, write_sweep_csv, RunReport, ScenarioSpec, ScenarioStatus, SolvedScenario,
};
use dicesg_core::{
    load_params, run_manifest, Error, ModelParams, Overrides, RunManifest, ScenarioConfig, SensitivityScenario,
};

#[derive(Parser)]
#[command(
    name = "dicesg",
    version,
    about = "DICE-type climate-economy model with carbon removal and solar geoengineering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every scenario of a manifest (the built-in 13-scenario set by default).
    Run(RunArgs),
    /// Solve a single scenario described by flags.
    Optimize(OptimizeArgs),
    /// Scale the SG path of a solved scenario and report welfare and 2050 costs.
    SweepSg(SweepArgs),
    /// Load a parameter file, check it and print the annual calibration.
    ValidateParams {
        /// Parameter file; the bundled calibration when omitted.
        path: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Manifest file (TOML).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory; overrides the manifest's.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SolverArgs {
    /// Parameter file; overrides the manifest's.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Seed for the random multi-starts.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    multistarts: Option<usize>,
    /// Projected-gradient tolerance relative to the objective scale.
    #[arg(long)]
    pg_tolerance: Option<f64>,
    /// Largest accepted temperature-cap violation, degC.
    #[arg(long)]
    cap_tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, m: &mut RunManifest) {
        if let Some(p) = &self.params {
            m.params = Some(p.clone());
        }
        if let Some(s) = self.seed {
            m.seed = s;
        }
        m.multistarts = self.multistarts.or(m.multistarts);
        m.pg_tolerance = self.pg_tolerance.or(m.pg_tolerance);
        m.cap_tolerance = self.cap_tolerance.or(m.cap_tolerance);
        m.max_iterations = self.max_iterations.or(m.max_iterations);
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario name, used for the output subdirectory.
    #[arg(long, default_value = "scenario")]
    name: String,
    /// Allow net removal (abatement above one).
    #[arg(long)]
    allow_cdr: bool,
    /// Allow solar geoengineering.
    #[arg(long)]
    allow_sg: bool,
    /// Freeze abatement at its initial level.
    #[arg(long)]
    baseline: bool,
    /// Cost-effectiveness run under this temperature cap, degC.
    #[arg(long)]
    t_cap: Option<f64>,
    /// Sensitivity case S1..S6.
    #[arg(long)]
    sensitivity: Option<SensitivityScenario>,
    #[arg(long)]
    time_preference: Option<f64>,
    #[arg(long)]
    damage_multiplier: Option<f64>,
    #[arg(long)]
    sg_damage_multiplier: Option<f64>,
    #[arg(long)]
    sg_damage_exponent: Option<f64>,
}

impl ScenarioArgs {
    fn spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            name: self.name.clone(),
            allow_cdr: self.allow_cdr,
            allow_sg: self.allow_sg,
            baseline: self.baseline,
            t_cap: self.t_cap,
            sensitivity: self.sensitivity,
            overrides: Overrides {
                time_preference: self.time_preference,
                damage_multiplier: self.damage_multiplier,
                sg_damage_multiplier: self.sg_damage_multiplier,
                sg_damage_exponent: self.sg_damage_exponent,
            },
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario to perturb, looked up in the manifest.
    #[arg(long, default_value = "full")]
    scenario: String,
    /// Manifest file; the built-in set when omitted.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Comma-separated scale factors.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1,1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2"
    )]
    scales: Vec<f64>,
    /// Output CSV file.
    #[arg(long, default_value = "sg_sweep.csv")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema { .. }
        | Error::Validation { .. }
        | Error::Calibration { .. }
        | Error::Domain { .. }
        | Error::ControlBounds { .. }
        | Error::UnknownScenario(_) => 2,
        Error::NonConvergence(_) | Error::Refused { .. } => 3,
        Error::Io { .. } | Error::Csv(_) => 4,
    }
}

fn load(manifest: &RunManifest) -> Result<ModelParams, Error> {
    match &manifest.params {
        Some(p) => load_params(p),
        None => ModelParams::dice2016r2(),
    }
}

fn print_report(report: &RunReport) {
    println!(
        "{:<24} {:<14} {:>9} {:>8} {:>8} {:>8}",
        "scenario", "status", "net-zero", "peak T", "peak SG", "BGE %"
    );
    for r in &report.results {
        match &r.summary {
            Some(s) => println!(
                "{:<24} {:<14} {:>9} {:>8.2} {:>8.2} {:>8.3}",
                r.name,
                r.status.label(),
                s.net_zero_year.map_or("-".to_string(), |y| y.to_string()),
                s.peak_temperature.value,
                s.peak_sg.value,
                s.bge_vs_baseline
            ),
            None => println!("{:<24} {:<14}", r.name, r.status.label()),
        }
        if let ScenarioStatus::Failed(msg) = &r.status {
            eprintln!("{}: {msg}", r.name);
        }
    }
    println!("results in {}", report.output_dir.display());
}

fn finish(report: &RunReport) -> ExitCode {
    print_report(report);
    let validation = report
        .results
        .iter()
        .any(|r| matches!(r.status, ScenarioStatus::Failed(_)));
    if report.all_converged() {
        ExitCode::SUCCESS
    } else if validation && !report.results.iter().any(|r| r.status == ScenarioStatus::NotConverged) {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn run(args: RunArgs) -> Result<ExitCode, Error> {
    let mut manifest = match &args.manifest {
        Some(p) => RunManifest::load(p)?,
        None => RunManifest::default_manifest("out"),
    };
    if let Some(out) = &args.out {
        manifest.output_dir = out.clone();
    }
    args.solver.apply(&mut manifest);
    manifest.validate()?;
    let params = load(&manifest)?;
    Ok(finish(&run_manifest(&manifest, &params)?))
}

fn optimize(args: OptimizeArgs) -> Result<ExitCode, Error> {
    let mut manifest = RunManifest::default_manifest(&args.out);
    manifest.scenarios = vec![args.scenario.spec()];
    args.solver.apply(&mut manifest);
    manifest.validate()?;
    let params = load(&manifest)?;
    Ok(finish(&run_manifest(&manifest, &params)?))
}

fn sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    let mut manifest = match &args.manifest {
        Some(p) => RunManifest::load(p)?,
        None => RunManifest::default_manifest("out"),
    };
    args.solver.apply(&mut manifest);
    manifest.validate()?;
    let spec = manifest.find(&args.scenario)?.clone();
    if !spec.allow_sg {
        return Err(Error::Validation {
            field: "scenario".into(),
            reason: format!("`{}` does not use SG", spec.name),
        });
    }
    if let Some(bad) = args.scales.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::Validation {
            field: "scales".into(),
            reason: format!("{bad} is not a finite non-negative number"),
        });
    }
    let params = load(&manifest)?;
    let opts = manifest.options();
    let solution = match solve_scenario(&spec, &params, &opts)? {
        SolvedScenario::Optimal(s) => s,
        SolvedScenario::Infeasible { min_max_violation, .. } => {
            return Err(Error::Validation {
                field: "scenario".into(),
                reason: format!(
                    "`{}` is infeasible (cap exceeded by {min_max_violation:.3} degC)",
                    spec.name
                ),
            })
        }
    };
    let base_config = ScenarioConfig::baseline().with_overrides(spec.config().overrides);
    let baseline = optimize_with(&base_config, &params, &opts)?;
    let rows = sweep_sg_scale(&solution, &baseline.trajectory, &params, &args.scales)?;
    write_sweep_csv(&args.out, &rows)?;
    println!(
        "{:>6} {:>10} {:>14} {:>16}",
        "scale", "BGE %", "side eff. %", "avoided dmg. %"
    );
    for r in &rows {
        println!(
            "{:>6.2} {:>10.4} {:>14.4} {:>16.4}",
            r.scale, r.bge_change_pct, r.side_effects_2050_pct_gwp, r.avoided_damages_2050_pct_gwp
        );
    }
    println!("written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn validate_params(path: Option<&Path>) -> Result<ExitCode, Error> {
    let p = match path {
        Some(p) => load_params(p)?,
        None => ModelParams::dice2016r2()?,
    };
    let c = &p.calibration;
    println!("horizon: {} years from {}", p.horizon(), p.paths.start_year);
    println!(
        "carbon matrix: {:?}, max |Phi^5 - Phi5| = {:.3e}",
        c.carbon_root_method, c.carbon_root_residual
    );
    for row in &p.climate.carbon_transfer {
        println!("  [{:.8}, {:.8}, {:.8}]", row[0], row[1], row[2]);
    }
    println!("annual depreciation: {:.6}", c.annual_depreciation);
    println!(
        "temperature speeds: atmosphere {:.6}, ocean {:.6} ({})",
        c.atmosphere_speed,
        c.ocean_speed,
        if c.temperature_refit { "re-fitted" } else { "rescaled" }
    );
    println!(
        "baseline temperature gap to the five-year run: {:.4} degC (rescaled only: {:.4})",
        c.temperature_deviation, c.temperature_deviation_rescaled
    );
    println!("ok");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Optimize(a) => optimize(a),
        Command::SweepSg(a) => sweep(a),
        Command::ValidateParams { path } => validate_params(path.as_deref()),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(exit_code(&e))
    })
}
