use rayon::prelude::*;

use super::config::{ScenarioConfig, TERMINAL_TAIL_YEARS};
use crate::climate::{self, ClimateState, CO2_PER_C};
use crate::economy::{self, Controls, EconState, YearFlows, YearInputs};
use crate::error::{Error, Result};
use crate::params::{EconParams, ModelParams};

/// Decision variables for every year of the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    pub mu: Vec<f64>,
    pub savings: Vec<f64>,
    pub srm: Vec<f64>,
}

impl ControlPath {
    pub fn constant(horizon: usize, mu: f64, savings: f64, srm: f64) -> Self {
        Self {
            mu: vec![mu; horizon],
            savings: vec![savings; horizon],
            srm: vec![srm; horizon],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn at(&self, t: usize) -> Controls {
        Controls {
            mu: self.mu[t],
            savings: self.savings[t],
            srm: self.srm[t],
        }
    }

    /// Checks lengths and the box implied by `config`.
    pub fn check_bounds(&self, config: &ScenarioConfig, horizon: usize) -> Result<()> {
        for (name, v) in [("mu", &self.mu), ("savings", &self.savings), ("srm", &self.srm)] {
            if v.len() != horizon {
                return Err(Error::validation(
                    format!("controls.{name}"),
                    format!("length {} differs from horizon {horizon}", v.len()),
                ));
            }
        }
        let boxes: [(&'static str, &Vec<f64>, f64, f64); 3] = [
            ("mu", &self.mu, 0.0, config.mu_upper()),
            ("savings", &self.savings, 0.0, 1.0),
            ("srm", &self.srm, 0.0, config.srm_upper()),
        ];
        for (control, values, lower, upper) in boxes {
            for (year, &value) in values.iter().enumerate() {
                if !(value >= lower && value <= upper) {
                    return Err(Error::ControlBounds {
                        control,
                        year,
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Full per-year record of a simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start_year: i32,
    pub controls: ControlPath,
    pub climate: Vec<ClimateState>,
    pub capital: Vec<f64>,
    pub flows: Vec<YearFlows>,
    pub population: Vec<f64>,
    /// Total radiative forcing, W/m2.
    pub forcing: Vec<f64>,
    pub co2_forcing: Vec<f64>,
    pub exogenous_forcing: Vec<f64>,
    /// Discounted utility over the horizon.
    pub welfare: f64,
    /// Welfare plus the terminal-value correction; what the optimizer maximizes.
    pub objective: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn year(&self, t: usize) -> i32 {
        self.start_year + t as i32
    }

    pub fn index_of(&self, year: i32) -> Option<usize> {
        let t = year - self.start_year;
        (t >= 0 && (t as usize) < self.len()).then_some(t as usize)
    }

    pub fn t_atm(&self) -> Vec<f64> {
        self.climate.iter().map(|c| c.t_atm).collect()
    }

    pub fn industrial_emissions(&self) -> Vec<f64> {
        self.flows.iter().map(|f| f.industrial_emissions).collect()
    }

    pub fn per_capita_consumption(&self) -> Vec<f64> {
        self.flows.iter().map(|f| f.per_capita_consumption).collect()
    }
}

/// Adjoint sensitivities of the objective.
#[derive(Debug, Clone)]
pub struct Sensitivities {
    pub mu: Vec<f64>,
    pub savings: Vec<f64>,
    pub srm: Vec<f64>,
    /// With respect to an extra GtCO2 emitted in year t, controls fixed.
    pub emissions: Vec<f64>,
    /// Direct partial with respect to consumption (trillion USD) in year t.
    pub consumption: Vec<f64>,
}

/// A calibration seen through one scenario's effective economic parameters.
#[derive(Debug, Clone)]
pub struct Model<'a> {
    pub params: &'a ModelParams,
    pub econ: EconParams,
    weights: Vec<f64>,
}

impl<'a> Model<'a> {
    pub fn new(params: &'a ModelParams, config: &ScenarioConfig) -> Self {
        Self::with_econ(params, config.effective_econ(&params.econ))
    }

    pub fn with_econ(params: &'a ModelParams, econ: EconParams) -> Self {
        let n = params.horizon();
        let mut weights: Vec<f64> = (0..n).map(|t| economy::discount_factor(t, &econ)).collect();
        let q = 1.0 / (1.0 + econ.time_preference);
        let tail: f64 = (1..=TERMINAL_TAIL_YEARS).map(|k| q.powi(k as i32)).sum();
        if let Some(last) = weights.last_mut() {
            *last *= 1.0 + tail;
        }
        Self { params, econ, weights }
    }

    pub fn horizon(&self) -> usize {
        self.params.horizon()
    }

    /// Per-year weights on `L_t u(c_t)` in the optimized objective.
    pub fn objective_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of `w_t L_t`, used to normalize the objective.
    pub fn objective_scale(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.params.paths.population)
            .map(|(w, l)| w * l)
            .sum()
    }

    fn inputs(&self, t: usize) -> YearInputs {
        let p = &self.params.paths;
        YearInputs {
            population: p.population[t],
            productivity: p.productivity[t],
            emissions_intensity: p.emissions_intensity[t],
            land_emissions: p.land_emissions[t],
            backstop_cost_fraction: p.backstop_cost_fraction[t],
        }
    }

    /// Runs the model forward. `pulse` adds extra GtCO2 in one year.
    pub fn run(&self, controls: &ControlPath, pulse: Option<(usize, f64)>) -> Result<Trajectory> {
        let n = self.horizon();
        let p = self.params;
        let cp = &p.climate;
        let mut state = ClimateState {
            m_at: p.initial.m_at,
            m_up: p.initial.m_up,
            m_lo: p.initial.m_lo,
            t_atm: p.initial.t_atm,
            t_ocean: p.initial.t_ocean,
        };
        let mut econ_state = EconState {
            capital: p.initial.capital,
        };
        let mut traj = Trajectory {
            start_year: p.paths.start_year,
            controls: controls.clone(),
            climate: Vec::with_capacity(n),
            capital: Vec::with_capacity(n),
            flows: Vec::with_capacity(n),
            population: p.paths.population.clone(),
            forcing: Vec::with_capacity(n),
            co2_forcing: Vec::with_capacity(n),
            exogenous_forcing: p.paths.exogenous_forcing.clone(),
            welfare: 0.0,
            objective: 0.0,
        };
        for t in 0..n {
            let c = controls.at(t);
            let (next_econ, flows) = economy::economy_step(
                &econ_state,
                state.t_atm,
                &c,
                &self.inputs(t),
                &self.econ,
                cp.forcing_2xco2,
            );
            let co2 = climate::forcing(state.m_at, 0.0, 0.0, cp);
            traj.co2_forcing.push(co2);
            traj.forcing.push(co2 + p.paths.exogenous_forcing[t] - c.srm);
            traj.climate.push(state);
            traj.capital.push(econ_state.capital);
            traj.flows.push(flows);
            if t + 1 == n {
                break;
            }
            let extra = match pulse {
                Some((year, amount)) if year == t => amount,
                _ => 0.0,
            };
            let carbon = climate::carbon_step(&state, flows.emissions + extra, cp).map_err(|e| match e {
                Error::Domain { reason, .. } => Error::Domain { year: t, reason },
                other => other,
            })?;
            let f_next = climate::forcing(carbon.m_at, p.paths.exogenous_forcing[t + 1], controls.srm[t + 1], cp);
            state = climate::temperature_step(&carbon, f_next, cp);
            econ_state = next_econ;
            if !(econ_state.capital > 0.0) || !state.t_atm.is_finite() {
                return Err(Error::Domain {
                    year: t,
                    reason: format!("capital stock fell to {:.3e}", econ_state.capital),
                });
            }
        }
        let cpc = traj.per_capita_consumption();
        traj.welfare = economy::welfare(&traj.population, &cpc, &self.econ);
        traj.objective = self.objective(&traj);
        Ok(traj)
    }

    /// `sum_t w_t L_t u(c_t)` with the terminal-value weights.
    pub fn objective(&self, traj: &Trajectory) -> f64 {
        let eta = self.econ.elasticity_marginal_utility;
        traj.flows
            .iter()
            .zip(&traj.population)
            .zip(&self.weights)
            .map(|((f, l), w)| w * l * economy::utility(f.per_capita_consumption, eta))
            .sum()
    }

    /// Reverse sweep for the gradient of `objective + sum_t phi_t(T_atm_t)`,
    /// where `temperature_seeds[t] = dphi_t/dT_atm_t`.
    pub fn adjoint(&self, traj: &Trajectory, temperature_seeds: Option<&[f64]>) -> Sensitivities {
        self.adjoint_weighted(traj, 1.0, temperature_seeds)
    }

    /// As [`Model::adjoint`] for `utility_weight * objective + sum_t phi_t(T_atm_t)`.
    pub fn adjoint_weighted(
        &self,
        traj: &Trajectory,
        utility_weight: f64,
        temperature_seeds: Option<&[f64]>,
    ) -> Sensitivities {
        let n = traj.len();
        let p = self.params;
        let cp = &p.climate;
        let tc = &cp.temperature;
        let e = &self.econ;
        let phi = &cp.carbon_transfer;
        let lambda = cp.feedback();
        let eta = e.elasticity_marginal_utility;
        let f2x = cp.forcing_2xco2;

        let mut out = Sensitivities {
            mu: vec![0.0; n],
            savings: vec![0.0; n],
            srm: vec![0.0; n],
            emissions: vec![0.0; n],
            consumption: vec![0.0; n],
        };
        // adjoints of the state at t + 1
        let mut adj_k = 0.0;
        let mut adj_m = [0.0; 3];
        let mut adj_t = 0.0;
        let mut adj_o = 0.0;

        for t in (0..n).rev() {
            if t + 1 < n {
                let g_forcing = adj_t * tc.atmosphere_speed;
                adj_m[0] += g_forcing * f2x / (traj.climate[t + 1].m_at * std::f64::consts::LN_2);
                out.srm[t + 1] -= g_forcing;
            }
            let adj_x = [0, 1, 2].map(|j| phi[0][j] * adj_m[0] + phi[1][j] * adj_m[1] + phi[2][j] * adj_m[2]);
            let g_e = adj_x[0] / CO2_PER_C;
            out.emissions[t] = g_e;

            let state = &traj.climate[t];
            let mut adj_t_now = adj_t * (1.0 - tc.atmosphere_speed * (lambda + tc.ocean_exchange))
                + adj_o * tc.ocean_speed
                + temperature_seeds.map_or(0.0, |s| s[t]);
            let adj_o_now = adj_t * tc.atmosphere_speed * tc.ocean_exchange + adj_o * (1.0 - tc.ocean_speed);

            let f = &traj.flows[t];
            let c = traj.controls.at(t);
            let inputs = self.inputs(t);
            let y = f.gross_output;
            let omega = 1.0 - f.climate_damage - f.sg_damage;
            let abate = f.abatement_cost;

            let g_c =
                utility_weight * self.weights[t] * 1000.0 * economy::marginal_utility(f.per_capita_consumption, eta);
            out.consumption[t] = g_c;
            let g_net = c.savings * adj_k + (1.0 - c.savings) * g_c;
            out.savings[t] = f.net_output * (adj_k - g_c);
            let g_omega = g_net * y * (1.0 - abate);
            let g_abate = -g_net * y * omega;
            adj_t_now += -g_omega * 2.0 * e.damage_coeff * state.t_atm;
            let dsg = if c.srm > 0.0 || e.sg_damage_exponent == 1.0 {
                e.sg_damage_coeff * e.sg_damage_exponent * c.srm.powf(e.sg_damage_exponent - 1.0)
                    / f2x.powf(e.sg_damage_exponent)
            } else {
                0.0
            };
            out.srm[t] += -g_omega * dsg;
            let dabate = if c.mu > 0.0 {
                inputs.backstop_cost_fraction * e.abatement_exponent * c.mu.powf(e.abatement_exponent - 1.0)
            } else {
                0.0
            };
            out.mu[t] += g_abate * dabate - g_e * inputs.emissions_intensity * y;
            let g_y = g_net * omega * (1.0 - abate) + g_e * inputs.emissions_intensity * (1.0 - c.mu);
            let k = traj.capital[t];
            adj_k = (1.0 - e.depreciation) * adj_k + g_y * e.capital_share * y / k;
            adj_m = adj_x;
            adj_t = adj_t_now;
            adj_o = adj_o_now;
        }
        out
    }
}

/// Simulates a control path after checking it against the scenario's bounds.
pub fn simulate(controls: &ControlPath, config: &ScenarioConfig, params: &ModelParams) -> Result<Trajectory> {
    config.validate()?;
    controls.check_bounds(config, params.horizon())?;
    Model::new(params, config).run(controls, None)
}

/// Central differences of the objective with respect to every control.
/// Columns are evaluated in parallel; the result does not depend on scheduling.
pub fn finite_difference_gradient(model: &Model<'_>, controls: &ControlPath, step: f64) -> Result<Sensitivities> {
    let n = controls.len();
    let eval = |which: usize, t: usize| -> Result<f64> {
        let mut plus = controls.clone();
        let mut minus = controls.clone();
        let (vp, vm) = match which {
            0 => (&mut plus.mu, &mut minus.mu),
            1 => (&mut plus.savings, &mut minus.savings),
            _ => (&mut plus.srm, &mut minus.srm),
        };
        let h = step * vp[t].abs().max(1.0);
        vp[t] += h;
        vm[t] -= h;
        let fp = model.run(&plus, None)?.objective;
        let fm = model.run(&minus, None)?.objective;
        Ok((fp - fm) / (2.0 * h))
    };
    let column = |which: usize| -> Result<Vec<f64>> { (0..n).into_par_iter().map(|t| eval(which, t)).collect() };
    let emissions = (0..n)
        .into_par_iter()
        .map(|t| {
            let h = step * 100.0;
            let fp = model.run(controls, Some((t, h)))?.objective;
            let fm = model.run(controls, Some((t, -h)))?.objective;
            Ok((fp - fm) / (2.0 * h))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Sensitivities {
        mu: column(0)?,
        savings: column(1)?,
        srm: column(2)?,
        emissions,
        consumption: Vec::new(),
    })
}
