//! Production, emissions, abatement and damage costs, consumption and utility
//! for one simulated year.

use crate::params::EconParams;

/// Per-capita consumption (thousand USD) below which utility switches to a
/// quadratic extension, so welfare stays finite and differentiable when an
/// optimizer probes infeasible consumption.
pub const CONSUMPTION_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconState {
    /// Capital stock, trillions 2010 USD.
    pub capital: f64,
}

/// Decision variables for one year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    /// Fraction of baseline industrial emissions abated; above one is net removal.
    pub mu: f64,
    pub savings: f64,
    /// SG forcing offset, W/m2.
    pub srm: f64,
}

/// Exogenous inputs for one year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearInputs {
    pub population: f64,
    pub productivity: f64,
    pub emissions_intensity: f64,
    pub land_emissions: f64,
    pub backstop_cost_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearFlows {
    /// Trillions USD/yr.
    pub gross_output: f64,
    /// GtCO2/yr, negative under net removal.
    pub industrial_emissions: f64,
    /// Industrial plus land-use, GtCO2/yr.
    pub emissions: f64,
    /// Fractions of gross output.
    pub abatement_cost: f64,
    pub climate_damage: f64,
    pub sg_damage: f64,
    pub net_output: f64,
    pub consumption: f64,
    pub investment: f64,
    /// Thousand USD per person.
    pub per_capita_consumption: f64,
    pub per_capita_utility: f64,
}

impl YearFlows {
    pub fn feasible(&self) -> bool {
        self.consumption > 0.0
    }
}

/// Cobb-Douglas output; population in millions enters in billions.
pub fn gross_output(productivity: f64, capital: f64, population: f64, econ: &EconParams) -> f64 {
    let a = econ.capital_share;
    productivity * capital.powf(a) * (population / 1000.0).powf(1.0 - a)
}

pub fn industrial_emissions(intensity: f64, gross_output: f64, mu: f64) -> f64 {
    intensity * gross_output * (1.0 - mu)
}

/// Abatement (and, past `mu = 1`, removal) cost as a fraction of output.
pub fn abatement_cost_fraction(mu: f64, backstop_cost_fraction: f64, econ: &EconParams) -> f64 {
    backstop_cost_fraction * mu.powf(econ.abatement_exponent)
}

pub fn climate_damage_fraction(t_atm: f64, econ: &EconParams) -> f64 {
    econ.damage_coeff * t_atm * t_atm
}

/// SG side effects as a fraction of output; depends on the SG forcing only.
pub fn sg_damage_fraction(srm: f64, forcing_2xco2: f64, econ: &EconParams) -> f64 {
    let ratio = srm / forcing_2xco2;
    if econ.sg_damage_exponent == 2.0 {
        econ.sg_damage_coeff * ratio * ratio
    } else {
        econ.sg_damage_coeff * ratio.powf(econ.sg_damage_exponent)
    }
}

/// One year of the growth model.
///
/// Climate and SG damages share one multiplicative factor; abatement cost is
/// applied to what remains.
pub fn economy_step(
    state: &EconState,
    t_atm: f64,
    controls: &Controls,
    inputs: &YearInputs,
    econ: &EconParams,
    forcing_2xco2: f64,
) -> (EconState, YearFlows) {
    let y = gross_output(inputs.productivity, state.capital, inputs.population, econ);
    let damage = climate_damage_fraction(t_atm, econ);
    let sg = sg_damage_fraction(controls.srm, forcing_2xco2, econ);
    let abate = abatement_cost_fraction(controls.mu, inputs.backstop_cost_fraction, econ);
    let net = y * (1.0 - damage - sg) * (1.0 - abate);
    let consumption = (1.0 - controls.savings) * net;
    let investment = controls.savings * net;
    let e_ind = industrial_emissions(inputs.emissions_intensity, y, controls.mu);
    let cpc = 1000.0 * consumption / inputs.population;
    let next = EconState {
        capital: (1.0 - econ.depreciation) * state.capital + investment,
    };
    let flows = YearFlows {
        gross_output: y,
        industrial_emissions: e_ind,
        emissions: e_ind + inputs.land_emissions,
        abatement_cost: abate,
        climate_damage: damage,
        sg_damage: sg,
        net_output: net,
        consumption,
        investment,
        per_capita_consumption: cpc,
        per_capita_utility: utility(cpc, econ.elasticity_marginal_utility),
    };
    (next, flows)
}

fn crra(c: f64, eta: f64) -> f64 {
    if eta == 1.0 {
        c.ln()
    } else {
        (c.powf(1.0 - eta) - 1.0) / (1.0 - eta)
    }
}

/// CRRA utility of per-capita consumption, extended quadratically below
/// [`CONSUMPTION_FLOOR`].
pub fn utility(c: f64, eta: f64) -> f64 {
    if c >= CONSUMPTION_FLOOR {
        crra(c, eta)
    } else {
        let f = CONSUMPTION_FLOOR;
        let d = c - f;
        crra(f, eta) + f.powf(-eta) * d - 0.5 * eta * f.powf(-eta - 1.0) * d * d
    }
}

pub fn marginal_utility(c: f64, eta: f64) -> f64 {
    if c >= CONSUMPTION_FLOOR {
        c.powf(-eta)
    } else {
        let f = CONSUMPTION_FLOOR;
        f.powf(-eta) - eta * f.powf(-eta - 1.0) * (c - f)
    }
}

/// Discount factor `(1 + rho)^-t`.
pub fn discount_factor(t: usize, econ: &EconParams) -> f64 {
    (1.0 + econ.time_preference).powi(-(t as i32))
}

/// Discounted, population-weighted utility `sum_t L_t u(c_t) (1+rho)^-t`.
pub fn welfare(population: &[f64], per_capita_consumption: &[f64], econ: &EconParams) -> f64 {
    population
        .iter()
        .zip(per_capita_consumption)
        .enumerate()
        .map(|(t, (l, c))| l * utility(*c, econ.elasticity_marginal_utility) * discount_factor(t, econ))
        .sum()
}
