use dicesg_core::metrics;
use dicesg_core::optimizer::{perturb_sg, Model};
use dicesg_core::{optimize_with, Error, Mode, ModelParams, OptimizeOptions, ScenarioConfig, Solution, Trajectory};

fn params() -> ModelParams {
    ModelParams::dice2016r2().unwrap()
}

fn quick() -> OptimizeOptions {
    OptimizeOptions {
        multistarts: 0,
        ..OptimizeOptions::default()
    }
}

fn solve(config: ScenarioConfig, p: &ModelParams) -> Solution {
    optimize_with(&config, p, &quick()).unwrap()
}

fn mean_between(traj: &Trajectory, values: &[f64], from: i32, to: i32) -> f64 {
    let (a, b) = (traj.index_of(from).unwrap(), traj.index_of(to).unwrap());
    values[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
}

#[test]
fn optimum_reports_first_order_conditions() {
    let p = params();
    let s = solve(ScenarioConfig::mitigation_only(), &p);
    let d = &s.diagnostics;
    assert!(d.converged);
    assert!(d.pg_norm <= OptimizeOptions::default().accept_tolerance);
    assert!(d.iterations > 0 && d.evaluations >= d.iterations);
    // abatement sits on its upper bound of one once emissions are gone
    assert!(d.active_upper > 0);
    assert_eq!(s.controls.mu[0], p.econ.initial_abatement);
    assert!(s.controls.srm.iter().all(|x| *x == 0.0));
}

#[test]
fn welfare_is_monotone_in_the_feasible_set() {
    let p = params();
    let obj = |c: ScenarioConfig| solve(c, &p).trajectory.objective;
    let base = obj(ScenarioConfig::baseline());
    let m = obj(ScenarioConfig::mitigation_only());
    let cdr = obj(ScenarioConfig::mitigation_cdr());
    let sg = obj(ScenarioConfig::mitigation_sg());
    let full = obj(ScenarioConfig::full());
    assert!(m > base && cdr > m && sg > m && full > cdr && full > sg);
}

#[test]
fn repeated_solves_are_identical() {
    let p = params();
    let opts = OptimizeOptions {
        multistarts: 1,
        ..OptimizeOptions::default()
    };
    let a = optimize_with(&ScenarioConfig::mitigation_cdr(), &p, &opts).unwrap();
    let b = optimize_with(&ScenarioConfig::mitigation_cdr(), &p, &opts).unwrap();
    assert_eq!(a.controls, b.controls);
    assert_eq!(a.diagnostics, b.diagnostics);
    assert_eq!(a.diagnostics.starts, 2);
}

#[test]
fn iteration_cap_returns_best_path_with_diagnostics() {
    let p = params();
    let opts = OptimizeOptions {
        multistarts: 0,
        max_iterations: 3,
        ..OptimizeOptions::default()
    };
    match optimize_with(&ScenarioConfig::full(), &p, &opts) {
        Err(Error::NonConvergence(nc)) => {
            assert_eq!(nc.controls.len(), p.horizon());
            assert!(!nc.diagnostics.converged);
            assert_eq!(nc.diagnostics.iterations, 3);
        }
        other => panic!("expected non-convergence, got {:?}", other.map(|s| s.diagnostics)),
    }
}

#[test]
fn cost_effectiveness_configs_are_routed_elsewhere() {
    let p = params();
    let config = ScenarioConfig::full().with_mode(Mode::Cea { t_cap: 2.0 });
    assert!(matches!(
        optimize_with(&config, &p, &quick()),
        Err(Error::Validation { .. })
    ));
}

#[test]
fn sg_offsets_about_half_of_greenhouse_forcing() {
    let p = params();
    let s = solve(ScenarioConfig::mitigation_sg(), &p);
    let t = &s.trajectory;
    let ghg: Vec<f64> = t
        .co2_forcing
        .iter()
        .zip(&t.exogenous_forcing)
        .map(|(a, b)| a + b)
        .collect();
    let ratio = mean_between(t, &t.controls.srm, 2150, 2300) / mean_between(t, &ghg, 2150, 2300);
    assert!((0.35..=0.65).contains(&ratio), "{ratio}");
    let temps = t.t_atm();
    assert!((mean_between(t, &temps, 2150, 2300) - 3.0).abs() < 0.4);
}

#[test]
fn sg_perturbation_end_points() {
    let p = params();
    let base = solve(ScenarioConfig::baseline(), &p).trajectory;
    let s = solve(ScenarioConfig::full(), &p);
    let model = Model::new(&p, &s.config);
    let (same, bge1) = perturb_sg(&s, 1.0, &base, &p).unwrap();
    assert_eq!(same, s.trajectory);
    assert_eq!(bge1, metrics::bge(&model, &s.trajectory, &base));
    let (off, bge0) = perturb_sg(&s, 0.0, &base, &p).unwrap();
    assert!(off.controls.srm.iter().all(|x| *x == 0.0));
    assert_eq!(off.controls.mu, s.controls.mu);
    assert!(bge0 < bge1);
    assert!(perturb_sg(&s, f64::NAN, &base, &p).is_err());
}
