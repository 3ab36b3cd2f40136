//! Carbon tax, social cost of carbon, balanced growth equivalent and the
//! per-scenario summary statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::{Model, Solution, Trajectory};
use crate::params::EconParams;

/// Marginal abatement (or removal) cost in USD/tCO2.
pub fn carbon_tax(mu: f64, backstop_cost_fraction: f64, emissions_intensity: f64, econ: &EconParams) -> f64 {
    let x = econ.abatement_exponent;
    1000.0 * backstop_cost_fraction * x * mu.max(0.0).powf(x - 1.0) / emissions_intensity
}

pub fn carbon_tax_series(model: &Model<'_>, traj: &Trajectory) -> Vec<f64> {
    let p = &model.params.paths;
    traj.controls
        .mu
        .iter()
        .enumerate()
        .map(|(t, &mu)| carbon_tax(mu, p.backstop_cost_fraction[t], p.emissions_intensity[t], &model.econ))
        .collect()
}

/// Social cost of carbon (USD/tCO2) for every year from the adjoint sweep:
/// the shadow price of emissions over that of consumption.
pub fn scc_adjoint(model: &Model<'_>, traj: &Trajectory) -> Vec<f64> {
    let s = model.adjoint(traj, None);
    s.emissions
        .iter()
        .zip(&s.consumption)
        .map(|(e, c)| -1000.0 * e / c)
        .collect()
}

/// Social cost of carbon in year `t` from a 1 GtCO2 pulse with controls held
/// fixed.
pub fn scc_pulse(model: &Model<'_>, traj: &Trajectory, t: usize) -> Result<f64> {
    let pulsed = model.run(&traj.controls, Some((t, 1.0)))?;
    let f = &traj.flows[t];
    let eta = model.econ.elasticity_marginal_utility;
    let dj_dc = model.objective_weights()[t] * 1000.0 * crate::economy::marginal_utility(f.per_capita_consumption, eta);
    Ok(-1000.0 * (pulsed.objective - traj.objective) / dj_dc)
}

/// SCC series of a solved scenario; refused unless the solver converged.
pub fn scc(solution: &Solution, model: &Model<'_>) -> Result<Vec<f64>> {
    if !solution.diagnostics.converged {
        return Err(Error::Refused {
            what: "social cost of carbon",
            reason: format!("solution is not converged ({})", solution.diagnostics),
        });
    }
    Ok(scc_adjoint(model, &solution.trajectory))
}

/// Percent change `d` such that scaling baseline consumption by `1 + d` in
/// every year gives the scenario's welfare. Both paths are weighted as in the
/// optimized objective.
pub fn bge(model: &Model<'_>, scenario: &Trajectory, baseline: &Trajectory) -> f64 {
    let eta = model.econ.elasticity_marginal_utility;
    let w = model.objective_weights();
    let target = model.objective(scenario);
    let wl: f64 = w.iter().zip(&baseline.population).map(|(w, l)| w * l).sum();
    if eta == 1.0 {
        let base = model.objective(baseline);
        return 100.0 * (((target - base) / wl).exp() - 1.0);
    }
    let a: f64 = w
        .iter()
        .zip(&baseline.population)
        .zip(&baseline.flows)
        .map(|((w, l), f)| w * l * f.per_capita_consumption.powf(1.0 - eta) / (1.0 - eta))
        .sum();
    let b = wl / (1.0 - eta);
    100.0 * (((target + b) / a).powf(1.0 / (1.0 - eta)) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YearValue {
    pub year: i32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    /// Industrial emissions, GtCO2/yr.
    pub peak_emissions: YearValue,
    /// Peak emissions over same-year baseline emissions, percent.
    pub peak_emissions_pct_base: f64,
    pub net_zero_year: Option<i32>,
    pub net_positive_again_year: Option<i32>,
    /// Largest net removal, GtCO2/yr (positive number).
    pub peak_cdr: Option<YearValue>,
    /// Positive industrial emissions summed over the horizon, TtCO2.
    pub cumulative_industrial_emissions: f64,
    /// W/m2.
    pub peak_sg: YearValue,
    /// degC.
    pub peak_temperature: YearValue,
    pub bge_vs_baseline: f64,
    pub carbon_tax: Vec<f64>,
    pub scc: Vec<f64>,
}

/// Index of the largest value; the earliest wins on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// First index where the series crosses from positive to non-positive.
pub fn net_zero_index(e: &[f64]) -> Option<usize> {
    (1..e.len()).find(|&t| e[t - 1] > 0.0 && e[t] <= 0.0)
}

pub fn summarize(model: &Model<'_>, traj: &Trajectory, baseline: &Trajectory) -> ScenarioSummary {
    let e = traj.industrial_emissions();
    let at = |t: usize, value: f64| YearValue {
        year: traj.year(t),
        value,
    };
    let pe = argmax(&e);
    let base_e = baseline.flows[pe].industrial_emissions;
    let net_zero = net_zero_index(&e);
    let positive_again = net_zero.and_then(|z| (z + 1..e.len()).find(|&t| e[t] > 0.0));
    let removal: Vec<f64> = e.iter().map(|v| -v).collect();
    let pc = argmax(&removal);
    let srm = &traj.controls.srm;
    let ps = argmax(srm);
    let temps = traj.t_atm();
    let pt = argmax(&temps);
    ScenarioSummary {
        peak_emissions: at(pe, e[pe]),
        peak_emissions_pct_base: 100.0 * e[pe] / base_e,
        net_zero_year: net_zero.map(|t| traj.year(t)),
        net_positive_again_year: positive_again.map(|t| traj.year(t)),
        peak_cdr: (removal[pc] > 0.0).then(|| at(pc, removal[pc])),
        cumulative_industrial_emissions: e.iter().filter(|v| **v > 0.0).sum::<f64>() / 1000.0,
        peak_sg: at(ps, srm[ps]),
        peak_temperature: at(pt, temps[pt]),
        bge_vs_baseline: bge(model, traj, baseline),
        carbon_tax: carbon_tax_series(model, traj),
        scc: scc_adjoint(model, traj),
    }
}
