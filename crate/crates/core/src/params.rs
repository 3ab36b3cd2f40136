//! Calibration data: exogenous paths, climate and economic parameters, and
//! the structured parameter file they are loaded from.
//!
//! A parameter file carries the five-year DICE2016R2 calibration. Loading it
//! builds the five-year exogenous paths, converts them to annual resolution
//! and re-fits the step-dependent coefficients (see [`crate::calibration`]).

use std::path::Path;

use serde::Deserialize;

use crate::calibration::{self, CalibrationReport};
use crate::error::{Error, Result};

/// Row-major 3x3 matrix. For the carbon cycle, entry `[i][j]` is the share of
/// reservoir `j` that moves to reservoir `i` in one step.
pub type Matrix3 = [[f64; 3]; 3];

pub const SCHEMA_VERSION: u32 = 1;

/// Horizon of the annual model used throughout, in years.
pub const MIN_HORIZON: usize = 400;

static DEFAULT_FILE: &str = include_str!("../data/dice2016r2.toml");

/// Time series of the exogenous drivers, one entry per step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousPaths {
    pub start_year: i32,
    pub step_years: u32,
    /// Millions of people.
    pub population: Vec<f64>,
    /// Total factor productivity.
    pub productivity: Vec<f64>,
    /// tCO2 per thousand USD of gross output (GtCO2 per trillion USD).
    pub emissions_intensity: Vec<f64>,
    /// GtCO2/yr.
    pub land_emissions: Vec<f64>,
    /// Non-CO2 forcing, W/m2.
    pub exogenous_forcing: Vec<f64>,
    /// Abatement cost at full abatement, fraction of gross output.
    pub backstop_cost_fraction: Vec<f64>,
}

impl ExogenousPaths {
    pub fn len(&self) -> usize {
        self.population.len()
    }

    pub fn is_empty(&self) -> bool {
        self.population.is_empty()
    }

    pub fn year(&self, t: usize) -> i32 {
        self.start_year + (t as i32) * self.step_years as i32
    }

    /// Index of a calendar year, if it falls on a step of this series.
    pub fn index_of(&self, year: i32) -> Option<usize> {
        let offset = year - self.start_year;
        if offset < 0 || offset % self.step_years as i32 != 0 {
            return None;
        }
        let t = (offset / self.step_years as i32) as usize;
        (t < self.len()).then_some(t)
    }

    pub(crate) fn series(&self) -> [(&'static str, &Vec<f64>); 6] {
        [
            ("population", &self.population),
            ("productivity", &self.productivity),
            ("emissions_intensity", &self.emissions_intensity),
            ("land_emissions", &self.land_emissions),
            ("exogenous_forcing", &self.exogenous_forcing),
            ("backstop_cost_fraction", &self.backstop_cost_fraction),
        ]
    }

    /// Checks the structural invariants. Horizon length is checked by the
    /// loader, not here, so short synthetic series stay valid.
    pub fn validate(&self) -> Result<()> {
        if self.step_years == 0 {
            return Err(Error::validation("step_years", "must be positive"));
        }
        let n = self.len();
        if n < 2 {
            return Err(Error::validation("population", "need at least two steps"));
        }
        for (name, s) in self.series() {
            if s.len() != n {
                return Err(Error::validation(
                    name,
                    format!("length {} differs from population length {n}", s.len()),
                ));
            }
            if let Some(t) = s.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(name, format!("non-finite value at step {t}")));
            }
        }
        for (name, s) in [("population", &self.population), ("productivity", &self.productivity)] {
            if let Some(t) = s.iter().position(|&v| v <= 0.0) {
                return Err(Error::validation(name, format!("must be positive (step {t})")));
            }
        }
        for (name, s) in [
            ("emissions_intensity", &self.emissions_intensity),
            ("backstop_cost_fraction", &self.backstop_cost_fraction),
        ] {
            if let Some(t) = s.iter().position(|&v| v <= 0.0) {
                return Err(Error::validation(name, format!("must be positive (step {t})")));
            }
            if let Some(t) = s.windows(2).position(|w| w[1] >= w[0]) {
                return Err(Error::validation(
                    name,
                    format!("must be strictly decreasing (steps {t}..{})", t + 1),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureCoefficients {
    /// Adjustment speed of the atmosphere/upper-ocean layer, per step.
    pub atmosphere_speed: f64,
    /// Heat-exchange coefficient between the two layers.
    pub ocean_exchange: f64,
    /// Adjustment speed of the deep ocean, per step.
    pub ocean_speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClimateParams {
    /// Forcing from a doubling of atmospheric CO2, W/m2.
    pub forcing_2xco2: f64,
    /// Preindustrial atmospheric carbon, GtC.
    pub m_at_1750: f64,
    /// Annual reservoir transfer matrix (columns sum to one).
    pub carbon_transfer: Matrix3,
    pub temperature: TemperatureCoefficients,
    /// Equilibrium warming per CO2 doubling, degC.
    pub equilibrium_sensitivity: f64,
}

impl ClimateParams {
    /// Climate feedback parameter, W/m2 per degC.
    pub fn feedback(&self) -> f64 {
        self.forcing_2xco2 / self.equilibrium_sensitivity
    }

    pub fn validate(&self) -> Result<()> {
        validate_transfer("climate.carbon_transfer", &self.carbon_transfer, 1e-12)?;
        positive("climate.forcing_2xco2", self.forcing_2xco2)?;
        positive("climate.m_at_1750", self.m_at_1750)?;
        positive("climate.equilibrium_sensitivity", self.equilibrium_sensitivity)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EconParams {
    /// Cobb-Douglas capital exponent.
    pub capital_share: f64,
    /// Annual depreciation rate.
    pub depreciation: f64,
    /// Climate damages as a fraction of output per degC squared.
    pub damage_coeff: f64,
    pub abatement_exponent: f64,
    /// SG side effects, fraction of output at F_SRM = F_2xCO2.
    pub sg_damage_coeff: f64,
    pub sg_damage_exponent: f64,
    pub elasticity_marginal_utility: f64,
    /// Pure rate of time preference, per year.
    pub time_preference: f64,
    /// Abatement already in place in the first year (held fixed there).
    pub initial_abatement: f64,
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        open_unit("economy.capital_share", self.capital_share)?;
        open_unit("economy.depreciation", self.depreciation)?;
        positive("economy.damage_coeff", self.damage_coeff)?;
        if self.abatement_exponent <= 1.0 {
            return Err(Error::validation(
                "economy.abatement_exponent",
                "must exceed 1 for a convex cost curve",
            ));
        }
        non_negative("economy.sg_damage_coeff", self.sg_damage_coeff)?;
        if !(self.sg_damage_exponent == 1.0 || self.sg_damage_exponent == 2.0) {
            return Err(Error::validation("economy.sg_damage_exponent", "must be 1 or 2"));
        }
        positive("economy.elasticity_marginal_utility", self.elasticity_marginal_utility)?;
        non_negative("economy.time_preference", self.time_preference)?;
        if !(0.0..=1.0).contains(&self.initial_abatement) {
            return Err(Error::validation("economy.initial_abatement", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Long-run optimal savings rate used over the terminal years.
    pub fn steady_state_savings(&self) -> f64 {
        let d = self.depreciation;
        (d + 0.004) / (d + 0.004 * self.elasticity_marginal_utility + self.time_preference) * self.capital_share
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub capital: f64,
    pub m_at: f64,
    pub m_up: f64,
    pub m_lo: f64,
    pub t_atm: f64,
    pub t_ocean: f64,
}

/// Everything the annual model needs, immutable once loaded.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub paths: ExogenousPaths,
    pub climate: ClimateParams,
    pub econ: EconParams,
    pub initial: InitialConditions,
    pub calibration: CalibrationReport,
}

impl ModelParams {
    /// The bundled DICE2016R2 calibration at annual resolution.
    pub fn dice2016r2() -> Result<Self> {
        Self::from_toml_str(DEFAULT_FILE)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file = ParamFile::parse(text)?;
        calibration::build_annual(&file)
    }

    pub fn horizon(&self) -> usize {
        self.paths.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.paths.validate()?;
        if self.paths.step_years != 1 {
            return Err(Error::validation("horizon", "annual model needs one-year steps"));
        }
        if self.paths.len() < MIN_HORIZON {
            return Err(Error::validation(
                "horizon.years",
                format!("{} is shorter than the minimum {MIN_HORIZON}", self.paths.len()),
            ));
        }
        self.climate.validate()?;
        self.econ.validate()?;
        let i = &self.initial;
        for (name, v) in [
            ("initial.capital", i.capital),
            ("initial.m_at", i.m_at),
            ("initial.m_up", i.m_up),
            ("initial.m_lo", i.m_lo),
        ] {
            positive(name, v)?;
        }
        Ok(())
    }
}

/// Reads and calibrates a parameter file.
pub fn load_params(path: impl AsRef<Path>) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    ModelParams::from_toml_str(&text)
}

/// The bundled default parameter file, verbatim.
pub fn default_param_file() -> &'static str {
    DEFAULT_FILE
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub schema_version: u32,
    pub horizon: HorizonSection,
    pub exogenous: ExogenousSection,
    pub climate: ClimateSection,
    pub initial: InitialSection,
    pub economy: EconomySection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSection {
    pub start_year: i32,
    pub years: usize,
}

/// Generator parameters for the five-year DICE2016R2 exogenous paths.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExogenousSection {
    pub population_2015: f64,
    pub population_asymptote: f64,
    pub population_adjustment: f64,
    pub productivity_2015: f64,
    pub productivity_growth: f64,
    pub productivity_growth_decline: f64,
    pub industrial_emissions_2015: f64,
    pub gross_output_2015: f64,
    pub sigma_growth: f64,
    pub sigma_growth_decline: f64,
    pub land_emissions_2015: f64,
    pub land_emissions_decline: f64,
    pub backstop_price_2015: f64,
    pub backstop_price_decline: f64,
    pub forcing_other_2015: f64,
    pub forcing_other_2100: f64,
    /// Level held after the ramp ends.
    pub forcing_other_after_2100: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClimateSection {
    pub forcing_2xco2: f64,
    pub m_at_1750: f64,
    pub equilibrium_sensitivity: f64,
    pub carbon_transfer_5yr: Matrix3,
    pub atmosphere_speed_5yr: f64,
    pub ocean_exchange: f64,
    pub ocean_speed_5yr: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub capital: f64,
    pub m_at: f64,
    pub m_up: f64,
    pub m_lo: f64,
    pub t_atm: f64,
    pub t_ocean: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySection {
    pub capital_share: f64,
    pub depreciation: f64,
    pub damage_coeff: f64,
    pub abatement_exponent: f64,
    pub sg_damage_coeff: f64,
    pub sg_damage_exponent: f64,
    pub elasticity_marginal_utility: f64,
    pub time_preference: f64,
    pub initial_abatement: f64,
}

impl ParamFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ParamFile = toml::from_str(text).map_err(|e| {
            let offset = e.span().map(|s| s.start).unwrap_or(0);
            let (line, column) = line_col(text, offset);
            Error::Schema {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        if self.horizon.years < MIN_HORIZON {
            return Err(Error::validation(
                "horizon.years",
                format!("{} is shorter than the minimum {MIN_HORIZON}", self.horizon.years),
            ));
        }
        validate_transfer("climate.carbon_transfer_5yr", &self.climate.carbon_transfer_5yr, 1e-9)?;
        let c = &self.climate;
        positive("climate.forcing_2xco2", c.forcing_2xco2)?;
        positive("climate.m_at_1750", c.m_at_1750)?;
        positive("climate.equilibrium_sensitivity", c.equilibrium_sensitivity)?;
        positive("climate.atmosphere_speed_5yr", c.atmosphere_speed_5yr)?;
        non_negative("climate.ocean_exchange", c.ocean_exchange)?;
        positive("climate.ocean_speed_5yr", c.ocean_speed_5yr)?;
        let x = &self.exogenous;
        positive("exogenous.population_2015", x.population_2015)?;
        positive("exogenous.population_asymptote", x.population_asymptote)?;
        positive("exogenous.productivity_2015", x.productivity_2015)?;
        positive("exogenous.gross_output_2015", x.gross_output_2015)?;
        positive("exogenous.industrial_emissions_2015", x.industrial_emissions_2015)?;
        positive("exogenous.backstop_price_2015", x.backstop_price_2015)?;
        if x.sigma_growth >= 0.0 {
            return Err(Error::validation(
                "exogenous.sigma_growth",
                "must be negative (intensity declines)",
            ));
        }
        if !(0.0..1.0).contains(&x.productivity_growth) {
            return Err(Error::validation("exogenous.productivity_growth", "must lie in [0, 1)"));
        }
        if !(0.0 < x.backstop_price_decline && x.backstop_price_decline < 1.0) {
            return Err(Error::validation(
                "exogenous.backstop_price_decline",
                "must lie in (0, 1)",
            ));
        }
        let e = &self.economy;
        EconParams {
            capital_share: e.capital_share,
            depreciation: e.depreciation,
            damage_coeff: e.damage_coeff,
            abatement_exponent: e.abatement_exponent,
            sg_damage_coeff: e.sg_damage_coeff,
            sg_damage_exponent: e.sg_damage_exponent,
            elasticity_marginal_utility: e.elasticity_marginal_utility,
            time_preference: e.time_preference,
            initial_abatement: e.initial_abatement,
        }
        .validate()?;
        let i = &self.initial;
        positive("initial.capital", i.capital)?;
        positive("initial.m_at", i.m_at)?;
        positive("initial.m_up", i.m_up)?;
        positive("initial.m_lo", i.m_lo)?;
        Ok(())
    }

    /// Five-year exogenous paths from the DICE2016R2 generator equations,
    /// long enough to cover `horizon.years` after annual interpolation.
    pub fn five_year_paths(&self) -> ExogenousPaths {
        let x = &self.exogenous;
        let nodes = self.horizon.years.div_ceil(5) + 1;
        let step = 5.0;
        let mut population = Vec::with_capacity(nodes);
        let mut productivity = Vec::with_capacity(nodes);
        let mut sigma = Vec::with_capacity(nodes);
        let mut pop = x.population_2015;
        let mut tfp = x.productivity_2015;
        let mut sig = x.industrial_emissions_2015 / (x.gross_output_2015 * (1.0 - self.economy.initial_abatement));
        let mut gsig = x.sigma_growth;
        for k in 0..nodes {
            population.push(pop);
            productivity.push(tfp);
            sigma.push(sig);
            pop *= (x.population_asymptote / pop).powf(x.population_adjustment);
            let growth = x.productivity_growth * (-x.productivity_growth_decline * step * k as f64).exp();
            tfp /= 1.0 - growth;
            sig *= (gsig * step).exp();
            gsig *= (1.0 + x.sigma_growth_decline).powf(step);
        }
        let land_emissions = (0..nodes)
            .map(|k| x.land_emissions_2015 * (1.0 - x.land_emissions_decline).powi(k as i32))
            .collect();
        // Linear ramp over 17 periods, then a constant level.
        let df = x.forcing_other_2100 - x.forcing_other_2015;
        let exogenous_forcing = (0..nodes)
            .map(|k| {
                if k < 17 {
                    x.forcing_other_2015 + df * k as f64 / 17.0
                } else {
                    x.forcing_other_after_2100
                }
            })
            .collect();
        let backstop_cost_fraction = sigma
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let price = x.backstop_price_2015 * (1.0 - x.backstop_price_decline).powi(k as i32);
                price * s / self.economy.abatement_exponent / 1000.0
            })
            .collect();
        ExogenousPaths {
            start_year: self.horizon.start_year,
            step_years: 5,
            population,
            productivity,
            emissions_intensity: sigma,
            land_emissions,
            exogenous_forcing,
            backstop_cost_fraction,
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub(crate) fn validate_transfer(field: &str, m: &Matrix3, tol: f64) -> Result<()> {
    for (j, col) in (0..3).map(|j| (j, [m[0][j], m[1][j], m[2][j]])) {
        if let Some(v) = col.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::validation(
                format!("{field}[:, {j}]"),
                format!("entry {v} outside [0, 1]"),
            ));
        }
        let sum: f64 = col.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::validation(
                format!("{field}[:, {j}]"),
                format!("column sums to {sum}, not 1"),
            ));
        }
    }
    Ok(())
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be non-negative, got {v}")))
    }
}

fn open_unit(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must lie in (0, 1), got {v}")))
    }
}
