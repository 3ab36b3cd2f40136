//! Builds the annual model from a five-year parameter file.
//!
//! Exogenous paths are interpolated and the carbon matrix replaced by a
//! one-year root. Two things do not carry over by rescaling alone: the
//! five-year capital rule `K' = (1 - d)^5 K + 5 I` implies an annual
//! depreciation of `(1 - (1 - d)^5) / 5`, and the five-year temperature update
//! is driven by end-of-period forcing. The temperature speeds are therefore
//! re-fitted by least squares so that the annual baseline reproduces the
//! five-year baseline at the shared nodes.

use crate::annualize::{annualize_carbon_cycle, annualize_paths, mat_vec, RootMethod};
use crate::error::{Error, Result};
use crate::optimizer::{ControlPath, Model};
use crate::params::{
    ClimateParams, EconParams, ExogenousPaths, InitialConditions, ModelParams, ParamFile, TemperatureCoefficients,
};

/// Largest accepted gap between annual and five-year baseline temperatures, degC.
pub const TEMPERATURE_TOLERANCE: f64 = 0.05;
/// Five-year nodes compared during calibration (500 years).
pub const REFERENCE_NODES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub carbon_root_method: RootMethod,
    /// Largest entry of `|Phi^5 - Phi5|`.
    pub carbon_root_residual: f64,
    pub annual_depreciation: f64,
    pub atmosphere_speed: f64,
    pub ocean_speed: f64,
    /// Node deviation with the speeds simply divided by five.
    pub temperature_deviation_rescaled: f64,
    /// Node deviation after the re-fit (equal to the above if none was needed).
    pub temperature_deviation: f64,
    pub temperature_refit: bool,
}

/// Constant savings rate used by the calibration baseline.
pub fn reference_savings(file: &ParamFile) -> f64 {
    let e = &file.economy;
    let d = e.depreciation;
    (d + 0.004) / (d + 0.004 * e.elasticity_marginal_utility + e.time_preference) * e.capital_share
}

/// Atmospheric temperature at each node of the five-year model run with
/// constant abatement `mu` and savings `savings`.
pub fn five_year_temperatures(
    file: &ParamFile,
    paths: &ExogenousPaths,
    mu: f64,
    savings: f64,
    nodes: usize,
) -> Vec<f64> {
    let c = &file.climate;
    let e = &file.economy;
    let i = &file.initial;
    let lambda = c.forcing_2xco2 / c.equilibrium_sensitivity;
    let step = paths.step_years as f64;
    let mut k = i.capital;
    let mut m = [i.m_at, i.m_up, i.m_lo];
    let (mut t, mut o) = (i.t_atm, i.t_ocean);
    let mut out = vec![t];
    for n in 0..nodes {
        let y = paths.productivity[n]
            * k.powf(e.capital_share)
            * (paths.population[n] / 1000.0).powf(1.0 - e.capital_share);
        let damage = e.damage_coeff * t * t;
        let abate = paths.backstop_cost_fraction[n] * mu.powf(e.abatement_exponent);
        let net = y * (1.0 - damage) * (1.0 - abate);
        let emissions = paths.emissions_intensity[n] * y * (1.0 - mu) + paths.land_emissions[n];
        k = (1.0 - e.depreciation).powf(step) * k + step * savings * net;
        m = mat_vec(&c.carbon_transfer_5yr, &m);
        m[0] += step * emissions / crate::climate::CO2_PER_C;
        let f = c.forcing_2xco2 * (m[0] / c.m_at_1750).log2() + paths.exogenous_forcing[n + 1];
        let t_next = t + c.atmosphere_speed_5yr * (f - lambda * t - c.ocean_exchange * (t - o));
        o += c.ocean_speed_5yr * (t - o);
        t = t_next;
        out.push(t);
    }
    out
}

fn annual_node_residuals(params: &ModelParams, reference: &[f64], mu: f64, savings: f64) -> Result<Vec<f64>> {
    let n = params.horizon();
    let model = Model::with_econ(params, params.econ.clone());
    let traj = model.run(&ControlPath::constant(n, mu, savings, 0.0), None)?;
    let step = 5;
    Ok(reference
        .iter()
        .enumerate()
        .take_while(|(k, _)| k * step < n)
        .map(|(k, r)| traj.climate[k * step].t_atm - r)
        .collect())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Levenberg-Marquardt on the two temperature speeds.
fn refit_speeds(params: &mut ModelParams, reference: &[f64], mu: f64, savings: f64) -> Result<Vec<f64>> {
    let set = |p: &mut ModelParams, x: [f64; 2]| {
        p.climate.temperature.atmosphere_speed = x[0];
        p.climate.temperature.ocean_speed = x[1];
    };
    let tc = params.climate.temperature;
    let mut x = [tc.atmosphere_speed, tc.ocean_speed];
    let mut r = annual_node_residuals(params, reference, mu, savings)?;
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut damping = 1e-3;
    for _ in 0..100 {
        let mut jac = [vec![0.0; r.len()], vec![0.0; r.len()]];
        for j in 0..2 {
            let h = 1e-6 * x[j];
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let mut trial = params.clone();
            set(&mut trial, xp);
            let rp = annual_node_residuals(&trial, reference, mu, savings)?;
            set(&mut trial, xm);
            let rm = annual_node_residuals(&trial, reference, mu, savings)?;
            for i in 0..r.len() {
                jac[j][i] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let a = [
            [dot(&jac[0], &jac[0]), dot(&jac[0], &jac[1])],
            [dot(&jac[1], &jac[0]), dot(&jac[1], &jac[1])],
        ];
        let b = [-dot(&jac[0], &r), -dot(&jac[1], &r)];
        let mut improved = false;
        for _ in 0..30 {
            let m00 = a[0][0] * (1.0 + damping);
            let m11 = a[1][1] * (1.0 + damping);
            let det = m00 * m11 - a[0][1] * a[1][0];
            let dx = [(b[0] * m11 - a[0][1] * b[1]) / det, (m00 * b[1] - a[1][0] * b[0]) / det];
            let xn = [x[0] + dx[0], x[1] + dx[1]];
            if xn[0] > 0.0 && xn[1] > 0.0 && xn[0] < 1.0 && xn[1] < 1.0 {
                let mut trial = params.clone();
                set(&mut trial, xn);
                if let Ok(rn) = annual_node_residuals(&trial, reference, mu, savings) {
                    let cn: f64 = rn.iter().map(|v| v * v).sum();
                    if cn < cost {
                        let rel = (cost - cn) / cost;
                        x = xn;
                        r = rn;
                        cost = cn;
                        damping = (damping * 0.3).max(1e-12);
                        improved = rel > 1e-12;
                        break;
                    }
                }
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    set(params, x);
    Ok(r)
}

/// Annual model parameters from a parsed five-year file.
pub fn build_annual(file: &ParamFile) -> Result<ModelParams> {
    let paths5 = file.five_year_paths();
    let mut paths = annualize_paths(&paths5)?;
    let years = file.horizon.years;
    for v in [
        &mut paths.population,
        &mut paths.productivity,
        &mut paths.emissions_intensity,
        &mut paths.land_emissions,
        &mut paths.exogenous_forcing,
        &mut paths.backstop_cost_fraction,
    ] {
        v.truncate(years);
    }

    let c = &file.climate;
    let root = annualize_carbon_cycle(&c.carbon_transfer_5yr)?;
    let step = paths5.step_years as f64;
    let e = &file.economy;
    let annual_depreciation = (1.0 - (1.0 - e.depreciation).powf(step)) / step;

    let mut params = ModelParams {
        paths,
        climate: ClimateParams {
            forcing_2xco2: c.forcing_2xco2,
            m_at_1750: c.m_at_1750,
            carbon_transfer: root.matrix,
            temperature: TemperatureCoefficients {
                atmosphere_speed: c.atmosphere_speed_5yr / step,
                ocean_exchange: c.ocean_exchange,
                ocean_speed: c.ocean_speed_5yr / step,
            },
            equilibrium_sensitivity: c.equilibrium_sensitivity,
        },
        econ: EconParams {
            capital_share: e.capital_share,
            depreciation: annual_depreciation,
            damage_coeff: e.damage_coeff,
            abatement_exponent: e.abatement_exponent,
            sg_damage_coeff: e.sg_damage_coeff,
            sg_damage_exponent: e.sg_damage_exponent,
            elasticity_marginal_utility: e.elasticity_marginal_utility,
            time_preference: e.time_preference,
            initial_abatement: e.initial_abatement,
        },
        initial: InitialConditions {
            capital: file.initial.capital,
            m_at: file.initial.m_at,
            m_up: file.initial.m_up,
            m_lo: file.initial.m_lo,
            t_atm: file.initial.t_atm,
            t_ocean: file.initial.t_ocean,
        },
        calibration: CalibrationReport {
            carbon_root_method: root.method,
            carbon_root_residual: root.residual,
            annual_depreciation,
            atmosphere_speed: 0.0,
            ocean_speed: 0.0,
            temperature_deviation_rescaled: 0.0,
            temperature_deviation: 0.0,
            temperature_refit: false,
        },
    };
    params.validate()?;

    let mu = e.initial_abatement;
    let savings = reference_savings(file);
    let nodes = REFERENCE_NODES.min(years / 5);
    let reference = five_year_temperatures(file, &paths5, mu, savings, nodes);
    let rescaled = max_abs(&annual_node_residuals(&params, &reference, mu, savings)?);
    let mut deviation = rescaled;
    let mut refit = false;
    if rescaled >= TEMPERATURE_TOLERANCE {
        deviation = max_abs(&refit_speeds(&mut params, &reference, mu, savings)?);
        refit = true;
        if deviation >= TEMPERATURE_TOLERANCE {
            return Err(Error::Calibration {
                what: format!("annual baseline temperature within {TEMPERATURE_TOLERANCE} degC of the five-year model"),
                residual: deviation,
            });
        }
    }
    let tc = params.climate.temperature;
    params.calibration.atmosphere_speed = tc.atmosphere_speed;
    params.calibration.ocean_speed = tc.ocean_speed;
    params.calibration.temperature_deviation_rescaled = rescaled;
    params.calibration.temperature_deviation = deviation;
    params.calibration.temperature_refit = refit;
    Ok(params)
}
