use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, ScenarioConfig, TERMINAL_SAVINGS_YEARS};
use super::simulate::{ControlPath, Model, Sensitivities, Trajectory};
use crate::error::{Error, NonConverged, Result};
use crate::lbfgsb::{self, Status};
use crate::metrics;
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    /// Projected-gradient target relative to `max(1, |f|)`, where `f` is the
    /// objective normalized by discounted population.
    pub pg_tolerance: f64,
    /// A run whose line search stalls is still accepted if its relative
    /// projected gradient is below this.
    pub accept_tolerance: f64,
    pub max_iterations: usize,
    pub memory: usize,
    /// Random starts in addition to the deterministic one.
    pub multistarts: usize,
    pub seed: u64,
    /// Largest temperature-cap violation accepted in cost-effectiveness mode, degC.
    pub cap_tolerance: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            pg_tolerance: 1e-8,
            accept_tolerance: 1e-6,
            max_iterations: 20_000,
            memory: 20,
            multistarts: 3,
            seed: 2015,
            cap_tolerance: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub label: String,
    pub converged: bool,
    pub status: String,
    pub iterations: usize,
    pub evaluations: usize,
    /// Normalized objective that was minimized (negated welfare per capita).
    pub objective: f64,
    /// Projected-gradient infinity norm divided by `max(1, |objective|)`.
    pub pg_norm: f64,
    pub tolerance: f64,
    pub active_lower: usize,
    pub active_upper: usize,
    pub starts: usize,
    pub converged_starts: usize,
    pub best_start: usize,
    pub seed: u64,
    /// Largest temperature-cap violation, cost-effectiveness runs only.
    pub max_violation: Option<f64>,
    pub outer_iterations: usize,
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} after {} iterations ({} evaluations), objective {:.9e}, relative projected gradient {:.3e} (tolerance {:.1e}), {} lower / {} upper bounds active, {}/{} starts converged (best #{}), seed {}",
            self.label,
            self.status,
            self.iterations,
            self.evaluations,
            self.objective,
            self.pg_norm,
            self.tolerance,
            self.active_lower,
            self.active_upper,
            self.converged_starts,
            self.starts,
            self.best_start,
            self.seed,
        )?;
        if let Some(v) = self.max_violation {
            write!(
                f,
                ", max cap violation {v:.2e} degC after {} outer iterations",
                self.outer_iterations
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub config: ScenarioConfig,
    pub controls: ControlPath,
    pub trajectory: Trajectory,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub enum CeaOutcome {
    Feasible(Box<Solution>),
    /// No admissible path keeps temperature under the cap; carries the path
    /// that comes closest.
    Infeasible {
        min_max_violation: f64,
        closest: Box<Trajectory>,
    },
}

impl CeaOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, CeaOutcome::Feasible(_))
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            CeaOutcome::Feasible(s) => Some(s),
            CeaOutcome::Infeasible { .. } => None,
        }
    }
}

/// Maps the free decision variables to a full control path.
struct Layout {
    n: usize,
    free: Vec<usize>,
    fixed: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Layout {
    fn new(config: &ScenarioConfig, model: &Model<'_>) -> Self {
        let n = model.horizon();
        let mu0 = model.econ.initial_abatement;
        let s_terminal = model.econ.steady_state_savings();
        let mut fixed = vec![f64::NAN; 3 * n];
        fixed[0] = mu0;
        if config.baseline {
            fixed[..n].iter_mut().for_each(|v| *v = mu0);
        }
        fixed[n + n.saturating_sub(TERMINAL_SAVINGS_YEARS)..2 * n]
            .iter_mut()
            .for_each(|v| *v = s_terminal);
        fixed[2 * n] = 0.0;
        if !config.allow_sg {
            fixed[2 * n..].iter_mut().for_each(|v| *v = 0.0);
        }
        let free: Vec<usize> = (0..3 * n).filter(|&i| fixed[i].is_nan()).collect();
        let bounds = |i: usize| match i / n {
            0 => (0.0, config.mu_upper()),
            1 => (0.0, 1.0),
            _ => (0.0, config.srm_upper()),
        };
        let lower = free.iter().map(|&i| bounds(i).0).collect();
        let upper = free.iter().map(|&i| bounds(i).1).collect();
        Self {
            n,
            free,
            fixed,
            lower,
            upper,
        }
    }

    fn controls(&self, x: &[f64]) -> ControlPath {
        let mut full = self.fixed.clone();
        for (&i, &v) in self.free.iter().zip(x) {
            full[i] = v;
        }
        let n = self.n;
        ControlPath {
            mu: full[..n].to_vec(),
            savings: full[n..2 * n].to_vec(),
            srm: full[2 * n..].to_vec(),
        }
    }

    fn pack(&self, c: &ControlPath) -> Vec<f64> {
        let n = self.n;
        self.free
            .iter()
            .map(|&i| match i / n {
                0 => c.mu[i],
                1 => c.savings[i - n],
                _ => c.srm[i - 2 * n],
            })
            .collect()
    }

    fn gather(&self, s: &Sensitivities, out: &mut [f64]) {
        let n = self.n;
        for (o, &i) in out.iter_mut().zip(&self.free) {
            let v = match i / n {
                0 => s.mu[i],
                1 => s.savings[i - n],
                _ => s.srm[i - 2 * n],
            };
            *o = v;
        }
    }
}

/// Initial path: abatement ramps linearly to one over a century, savings flat.
fn default_start(layout: &Layout, mu0: f64) -> ControlPath {
    let n = layout.n;
    let mu = (0..n)
        .map(|t| (mu0 + (1.0 - mu0) * t as f64 / 100.0).min(1.0))
        .collect();
    let mut c = ControlPath {
        mu,
        savings: vec![0.25; n],
        srm: vec![0.0; n],
    };
    fill_fixed(layout, &mut c);
    c
}

fn random_start(layout: &Layout, mu0: f64, allow_sg: bool, rng: &mut ChaCha8Rng) -> ControlPath {
    let n = layout.n;
    let ramp: f64 = rng.gen_range(40.0..160.0);
    let top: f64 = rng.gen_range(0.8..1.0);
    let savings: f64 = rng.gen_range(0.2..0.3);
    let sg: f64 = if allow_sg { rng.gen_range(0.0..1.5) } else { 0.0 };
    let mut c = ControlPath {
        mu: (0..n).map(|t| (mu0 + (top - mu0) * t as f64 / ramp).min(top)).collect(),
        savings: vec![savings; n],
        srm: (0..n)
            .map(|t| sg * (-((t as f64 - ramp) / 80.0).powi(2)).exp())
            .collect(),
    };
    fill_fixed(layout, &mut c);
    c
}

fn fill_fixed(layout: &Layout, c: &mut ControlPath) {
    let x = layout.pack(c);
    *c = layout.controls(&x);
}

/// Extra objective term in temperatures; fills its gradient.
type Penalty<'a> = &'a dyn Fn(&[f64], &mut [f64]) -> f64;

struct Run {
    outcome: lbfgsb::Outcome,
    controls: ControlPath,
}

/// Minimizes `-J/S + penalty` from `start`, where `penalty(T)` returns the
/// added value and fills its temperature derivative.
fn descend(
    model: &Model<'_>,
    layout: &Layout,
    start: &ControlPath,
    opts: &OptimizeOptions,
    tolerance: f64,
    welfare_weight: f64,
    penalty: Option<Penalty<'_>>,
) -> Run {
    let scale = model.objective_scale();
    let n = layout.n;
    let mut seeds = vec![0.0; n];
    let mut temps = vec![0.0; n];
    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let controls = layout.controls(x);
        let traj = match model.run(&controls, None) {
            Ok(t) => t,
            Err(_) => return f64::NAN,
        };
        let mut value = -welfare_weight * traj.objective / scale;
        let seed_ref = match penalty {
            Some(p) => {
                for (dst, c) in temps.iter_mut().zip(&traj.climate) {
                    *dst = c.t_atm;
                }
                value += p(&temps, &mut seeds);
                Some(&seeds[..])
            }
            None => None,
        };
        let sens = model.adjoint_weighted(&traj, -welfare_weight / scale, seed_ref);
        layout.gather(&sens, g);
        value
    };
    let lopts = lbfgsb::Options {
        memory: opts.memory,
        max_iterations: opts.max_iterations,
        pg_tolerance: tolerance,
        max_backtracks: 60,
    };
    let x0 = layout.pack(start);
    let outcome = lbfgsb::minimize(objective, &x0, &layout.lower, &layout.upper, &lopts);
    let controls = layout.controls(&outcome.x);
    Run { outcome, controls }
}

fn accepted(o: &lbfgsb::Outcome, opts: &OptimizeOptions) -> bool {
    o.converged() || (o.status == Status::Stalled && o.pg_norm / o.f.abs().max(1.0) <= opts.accept_tolerance)
}

fn diagnostics(label: &str, layout: &Layout, run: &Run, opts: &OptimizeOptions) -> Diagnostics {
    let o = &run.outcome;
    let ok = accepted(o, opts);
    let eps = 1e-12;
    let active_lower = o.x.iter().zip(&layout.lower).filter(|(x, l)| **x <= **l + eps).count();
    let active_upper = o.x.iter().zip(&layout.upper).filter(|(x, u)| **x >= **u - eps).count();
    Diagnostics {
        label: label.to_string(),
        converged: ok,
        status: match o.status {
            Status::Converged => "converged",
            Status::Stalled if ok => "converged (line search at precision limit)",
            Status::IterationLimit => "iteration limit reached",
            Status::Stalled => "line search stalled",
            Status::InfeasibleStart => "infeasible start",
        }
        .to_string(),
        iterations: o.iterations,
        evaluations: o.evaluations,
        objective: o.f,
        pg_norm: o.pg_norm / o.f.abs().max(1.0),
        tolerance: opts.pg_tolerance,
        active_lower,
        active_upper,
        starts: 1,
        converged_starts: usize::from(ok),
        best_start: 0,
        seed: opts.seed,
        max_violation: None,
        outer_iterations: 0,
    }
}

/// Cost-benefit optimum with default options.
pub fn optimize(config: &ScenarioConfig, params: &ModelParams) -> Result<Solution> {
    optimize_with(config, params, &OptimizeOptions::default())
}

/// Cost-benefit optimum: the deterministic start plus `multistarts` random
/// starts; the best converged run is reported.
pub fn optimize_with(config: &ScenarioConfig, params: &ModelParams, opts: &OptimizeOptions) -> Result<Solution> {
    config.validate()?;
    if let Mode::Cea { .. } = config.mode {
        return Err(Error::validation(
            "mode",
            "use optimize_cea for cost-effectiveness runs",
        ));
    }
    let model = Model::new(params, config);
    let layout = Layout::new(config, &model);
    let mu0 = model.econ.initial_abatement;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![default_start(&layout, mu0)];
    for _ in 0..opts.multistarts {
        starts.push(random_start(&layout, mu0, config.allow_sg, &mut rng));
    }

    let mut best: Option<(usize, Run)> = None;
    let mut converged_starts = 0;
    let mut iterations = 0;
    let mut evaluations = 0;
    for (k, start) in starts.iter().enumerate() {
        let run = descend(&model, &layout, start, opts, opts.pg_tolerance, 1.0, None);
        iterations += run.outcome.iterations;
        evaluations += run.outcome.evaluations;
        converged_starts += usize::from(accepted(&run.outcome, opts));
        let better = match &best {
            None => true,
            Some((_, b)) => {
                let (rc, bc) = (accepted(&run.outcome, opts), accepted(&b.outcome, opts));
                (rc && !bc) || (rc == bc && run.outcome.f < b.outcome.f)
            }
        };
        if better {
            best = Some((k, run));
        }
    }
    let (best_start, run) = best.expect("at least one start");
    let mut diag = diagnostics(config.label(), &layout, &run, opts);
    diag.starts = starts.len();
    diag.converged_starts = converged_starts;
    diag.best_start = best_start;
    diag.iterations = iterations;
    diag.evaluations = evaluations;
    if !diag.converged {
        return Err(Error::NonConvergence(Box::new(NonConverged {
            controls: run.controls,
            diagnostics: diag,
        })));
    }
    let trajectory = model.run(&run.controls, None)?;
    Ok(Solution {
        config: config.clone(),
        controls: run.controls,
        trajectory,
        diagnostics: diag,
    })
}

fn max_violation(traj: &Trajectory, cap: f64) -> f64 {
    traj.climate.iter().map(|c| c.t_atm - cap).fold(0.0, f64::max)
}

/// Cost-effectiveness optimum under a temperature cap.
///
/// A feasibility phase first minimizes the squared cap exceedance; if that
/// cannot bring every year under the cap the verdict is infeasible. Otherwise
/// an augmented-Lagrangian loop maximizes damage-free welfare.
pub fn optimize_cea(config: &ScenarioConfig, params: &ModelParams, opts: &OptimizeOptions) -> Result<CeaOutcome> {
    config.validate()?;
    let Mode::Cea { t_cap } = config.mode else {
        return Err(Error::validation(
            "mode",
            "cost-effectiveness runs need a temperature cap",
        ));
    };
    let model = Model::new(params, config);
    let layout = Layout::new(config, &model);
    let mu0 = model.econ.initial_abatement;

    // Phase 1: feasibility, starting from the most aggressive admissible path.
    let mut start = default_start(&layout, mu0);
    for t in 1..layout.n {
        start.mu[t] = 1.0;
        if config.allow_sg {
            start.srm[t] = 2.0;
        }
    }
    fill_fixed(&layout, &mut start);
    let exceedance = |temps: &[f64], grad: &mut [f64]| -> f64 {
        let mut v = 0.0;
        for (g, &t) in grad.iter_mut().zip(temps) {
            let e = (t - t_cap).max(0.0);
            v += e * e;
            *g = 2.0 * e;
        }
        v
    };
    let phase1 = descend(&model, &layout, &start, opts, 1e-12, 0.0, Some(&exceedance));
    let closest = model.run(&phase1.controls, None)?;
    let violation = max_violation(&closest, t_cap);
    if violation > 2.0 * opts.cap_tolerance {
        return Ok(CeaOutcome::Infeasible {
            min_max_violation: violation,
            closest: Box::new(closest),
        });
    }

    // Phase 2: augmented Lagrangian on T_t - cap <= 0.
    let n = layout.n;
    let mut multipliers = vec![0.0; n];
    let mut rho = 100.0;
    let mut current = phase1.controls;
    let mut last_violation = f64::INFINITY;
    let mut iterations = phase1.outcome.iterations;
    let mut evaluations = phase1.outcome.evaluations;
    let mut outer = 0;
    loop {
        outer += 1;
        let lam = multipliers.clone();
        let penalty = move |temps: &[f64], grad: &mut [f64]| -> f64 {
            let mut v = 0.0;
            for t in 0..temps.len() {
                let g = temps[t] - t_cap;
                let m = (lam[t] + rho * g).max(0.0);
                v += (m * m - lam[t] * lam[t]) / (2.0 * rho);
                grad[t] = m;
            }
            v
        };
        let run = descend(&model, &layout, &current, opts, opts.pg_tolerance, 1.0, Some(&penalty));
        iterations += run.outcome.iterations;
        evaluations += run.outcome.evaluations;
        let traj = model.run(&run.controls, None)?;
        let v = max_violation(&traj, t_cap);
        for (m, c) in multipliers.iter_mut().zip(&traj.climate) {
            *m = (*m + rho * (c.t_atm - t_cap)).max(0.0);
        }
        current = run.controls.clone();
        let done = v < opts.cap_tolerance && accepted(&run.outcome, opts);
        if done || outer >= 30 {
            let mut diag = diagnostics(config.label(), &layout, &run, opts);
            diag.iterations = iterations;
            diag.evaluations = evaluations;
            diag.max_violation = Some(v);
            diag.outer_iterations = outer;
            diag.converged = done;
            if !done {
                diag.status = format!("{} (cap violation {v:.2e})", diag.status);
                return Err(Error::NonConvergence(Box::new(NonConverged {
                    controls: current,
                    diagnostics: diag,
                })));
            }
            return Ok(CeaOutcome::Feasible(Box::new(Solution {
                config: config.clone(),
                controls: current,
                trajectory: traj,
                diagnostics: diag,
            })));
        }
        if v > 0.25 * last_violation {
            rho *= 10.0;
        }
        last_violation = v;
    }
}

/// Re-simulates a solution with its SG path scaled, abatement and savings held
/// fixed, and returns the trajectory with its BGE change (percent) against
/// `baseline`.
pub fn perturb_sg(
    solution: &Solution,
    scale: f64,
    baseline: &Trajectory,
    params: &ModelParams,
) -> Result<(Trajectory, f64)> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::validation("scale", "must be finite and non-negative"));
    }
    let model = Model::new(params, &solution.config);
    let mut controls = solution.controls.clone();
    controls.srm.iter_mut().for_each(|f| *f *= scale);
    let traj = model.run(&controls, None)?;
    let change = metrics::bge(&model, &traj, baseline);
    Ok((traj, change))
}
