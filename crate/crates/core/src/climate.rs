//! Carbon cycle, radiative forcing and two-box temperature response, one
//! annual step at a time.

use crate::annualize::mat_vec;
use crate::error::{Error, Result};
use crate::params::ClimateParams;

/// GtCO2 per GtC.
pub const CO2_PER_C: f64 = 3.666;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClimateState {
    /// Atmospheric carbon, GtC.
    pub m_at: f64,
    /// Upper ocean and biosphere, GtC.
    pub m_up: f64,
    /// Lower ocean, GtC.
    pub m_lo: f64,
    /// Atmospheric temperature, degC above 1900.
    pub t_atm: f64,
    /// Lower-ocean temperature, degC above 1900.
    pub t_ocean: f64,
}

impl ClimateState {
    pub fn reservoirs(&self) -> [f64; 3] {
        [self.m_at, self.m_up, self.m_lo]
    }

    pub fn total_carbon(&self) -> f64 {
        self.m_at + self.m_up + self.m_lo
    }
}

/// Adds a year of emissions (GtCO2) to the atmosphere, then applies one year
/// of reservoir exchange.
pub fn carbon_step(state: &ClimateState, emissions: f64, params: &ClimateParams) -> Result<ClimateState> {
    let injected = [state.m_at + emissions / CO2_PER_C, state.m_up, state.m_lo];
    let [m_at, m_up, m_lo] = mat_vec(&params.carbon_transfer, &injected);
    if !(m_at > 0.0) {
        return Err(Error::Domain {
            year: 0,
            reason: format!("atmospheric carbon would fall to {m_at:.3} GtC"),
        });
    }
    Ok(ClimateState {
        m_at,
        m_up,
        m_lo,
        ..*state
    })
}

/// Radiative forcing in W/m2, with SG entering as negative forcing.
pub fn forcing(m_at: f64, exogenous: f64, srm: f64, params: &ClimateParams) -> f64 {
    params.forcing_2xco2 * (m_at / params.m_at_1750).log2() + exogenous - srm
}

/// One year of the two-box temperature model, driven by this year's forcing.
pub fn temperature_step(state: &ClimateState, forcing: f64, params: &ClimateParams) -> ClimateState {
    let c = &params.temperature;
    let t = state.t_atm;
    let o = state.t_ocean;
    ClimateState {
        t_atm: t + c.atmosphere_speed * (forcing - params.feedback() * t - c.ocean_exchange * (t - o)),
        t_ocean: o + c.ocean_speed * (t - o),
        ..*state
    }
}
