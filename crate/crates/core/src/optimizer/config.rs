use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::EconParams;

/// Numerical cap on `mu` when removal is allowed. Acceptance checks it never binds.
pub const MU_MAX: f64 = 10.0;
/// Numerical cap on SG forcing, W/m2.
pub const SRM_MAX: f64 = 20.0;
/// Savings is held at its steady-state value over this many final years.
pub const TERMINAL_SAVINGS_YEARS: usize = 20;
/// Final-year utility is counted again for this many discounted years beyond
/// the horizon.
pub const TERMINAL_TAIL_YEARS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Maximize welfare net of climate damages.
    Cba,
    /// Drop climate damages and cap atmospheric temperature.
    Cea { t_cap: f64 },
}

/// Parameter changes applied on top of the loaded calibration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub time_preference: Option<f64>,
    pub damage_multiplier: Option<f64>,
    pub sg_damage_multiplier: Option<f64>,
    pub sg_damage_exponent: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, econ: &EconParams) -> EconParams {
        let mut e = econ.clone();
        if let Some(r) = self.time_preference {
            e.time_preference = r;
        }
        if let Some(m) = self.damage_multiplier {
            e.damage_coeff *= m;
        }
        if let Some(m) = self.sg_damage_multiplier {
            e.sg_damage_coeff *= m;
        }
        if let Some(x) = self.sg_damage_exponent {
            e.sg_damage_exponent = x;
        }
        e
    }

    pub fn is_empty(&self) -> bool {
        self == &Overrides::default()
    }
}

/// Which instruments are available and how the objective is posed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub allow_cdr: bool,
    pub allow_sg: bool,
    pub mode: Mode,
    /// Abatement held at its initial level every year; savings still optimized.
    pub baseline: bool,
    pub overrides: Overrides,
}

impl ScenarioConfig {
    fn portfolio(allow_cdr: bool, allow_sg: bool) -> Self {
        Self {
            allow_cdr,
            allow_sg,
            mode: Mode::Cba,
            baseline: false,
            overrides: Overrides::default(),
        }
    }

    pub fn baseline() -> Self {
        Self {
            baseline: true,
            ..Self::portfolio(false, false)
        }
    }

    pub fn mitigation_only() -> Self {
        Self::portfolio(false, false)
    }

    pub fn mitigation_cdr() -> Self {
        Self::portfolio(true, false)
    }

    pub fn mitigation_sg() -> Self {
        Self::portfolio(false, true)
    }

    pub fn full() -> Self {
        Self::portfolio(true, true)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_overrides(mut self, overrides: Overrides) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.baseline && (self.allow_cdr || self.allow_sg) {
            return Err(Error::validation("baseline", "the baseline excludes CDR and SG"));
        }
        if let Mode::Cea { t_cap } = self.mode {
            if !(t_cap > 0.0) {
                return Err(Error::validation("mode.t_cap", "temperature cap must be positive"));
            }
            if self.baseline {
                return Err(Error::validation("baseline", "the baseline is a cost-benefit run"));
            }
        }
        let o = &self.overrides;
        if let Some(r) = o.time_preference {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::validation("overrides.time_preference", "must be non-negative"));
            }
        }
        for (name, v) in [
            ("overrides.damage_multiplier", o.damage_multiplier),
            ("overrides.sg_damage_multiplier", o.sg_damage_multiplier),
        ] {
            if let Some(m) = v {
                if !(m >= 0.0 && m.is_finite()) {
                    return Err(Error::validation(name, "must be non-negative"));
                }
            }
        }
        if let Some(x) = o.sg_damage_exponent {
            if !(x == 1.0 || x == 2.0) {
                return Err(Error::validation("overrides.sg_damage_exponent", "must be 1 or 2"));
            }
        }
        Ok(())
    }

    /// Economic parameters as seen by this scenario: overrides applied, and
    /// climate damages removed in cost-effectiveness mode (SG side effects stay).
    pub fn effective_econ(&self, base: &EconParams) -> EconParams {
        let mut e = self.overrides.apply(base);
        if matches!(self.mode, Mode::Cea { .. }) {
            e.damage_coeff = 0.0;
        }
        e
    }

    pub fn mu_upper(&self) -> f64 {
        if self.allow_cdr {
            MU_MAX
        } else {
            1.0
        }
    }

    pub fn srm_upper(&self) -> f64 {
        if self.allow_sg {
            SRM_MAX
        } else {
            0.0
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.baseline, self.allow_cdr, self.allow_sg) {
            (true, _, _) => "baseline",
            (false, false, false) => "mitigation",
            (false, true, false) => "mitigation+cdr",
            (false, false, true) => "mitigation+sg",
            (false, true, true) => "mitigation+cdr+sg",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_cannot_use_instruments() {
        let mut c = ScenarioConfig::baseline();
        c.allow_sg = true;
        assert!(c.validate().is_err());
        assert!(ScenarioConfig::baseline().validate().is_ok());
    }

    #[test]
    fn cea_needs_positive_cap() {
        let c = ScenarioConfig::full().with_mode(Mode::Cea { t_cap: 0.0 });
        assert!(c.validate().is_err());
    }

    #[test]
    fn cea_removes_climate_damages_only() {
        let base = crate::params::ModelParams::dice2016r2().unwrap().econ;
        let e = ScenarioConfig::full()
            .with_mode(Mode::Cea { t_cap: 2.0 })
            .effective_econ(&base);
        assert_eq!(e.damage_coeff, 0.0);
        assert_eq!(e.sg_damage_coeff, base.sg_damage_coeff);
    }
}
