//! Scenario definitions, run manifests and CSV outputs.

mod output;
mod runner;
mod sweep;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{Mode, OptimizeOptions, Overrides, ScenarioConfig};

pub use output::{policy_cost_fraction, write_atomic, SummaryRow, TrajectoryRow, SUMMARY_COLUMNS, TRAJECTORY_COLUMNS};
pub use runner::{run_manifest, solve_scenario, RunReport, ScenarioResult, ScenarioStatus, SolvedScenario};
pub use sweep::{sweep_sg_scale, write_sweep_csv, SweepRow};

/// The sensitivity cases applied to the full portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SensitivityScenario {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl SensitivityScenario {
    pub const ALL: [SensitivityScenario; 6] = [Self::S1, Self::S2, Self::S3, Self::S4, Self::S5, Self::S6];

    pub fn overrides(self) -> Overrides {
        let mut o = Overrides::default();
        match self {
            Self::S1 => o.time_preference = Some(0.03),
            Self::S2 => o.time_preference = Some(0.0),
            Self::S3 => o.damage_multiplier = Some(2.0),
            Self::S4 => o.sg_damage_exponent = Some(1.0),
            Self::S5 => o.sg_damage_multiplier = Some(2.0),
            Self::S6 => o.sg_damage_multiplier = Some(0.1),
        }
        o
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::S1 => "time preference 3%/yr",
            Self::S2 => "time preference 0%/yr",
            Self::S3 => "climate damages doubled",
            Self::S4 => "linear SG side effects",
            Self::S5 => "SG side effects doubled",
            Self::S6 => "SG side effects at 10%",
        }
    }
}

impl fmt::Display for SensitivityScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SensitivityScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::validation("sensitivity", format!("`{s}` is not one of S1..S6")))
    }
}

/// One entry of a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub allow_cdr: bool,
    #[serde(default)]
    pub allow_sg: bool,
    /// Abatement frozen at its initial level; savings still optimized.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub baseline: bool,
    /// Cost-effectiveness run under this temperature cap (degC) when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityScenario>,
    /// Applied after the sensitivity case; explicit fields win.
    #[serde(default)]
    pub overrides: Overrides,
}

impl ScenarioSpec {
    pub fn config(&self) -> ScenarioConfig {
        let base = self.sensitivity.map(|s| s.overrides()).unwrap_or_default();
        let o = &self.overrides;
        let overrides = Overrides {
            time_preference: o.time_preference.or(base.time_preference),
            damage_multiplier: o.damage_multiplier.or(base.damage_multiplier),
            sg_damage_multiplier: o.sg_damage_multiplier.or(base.sg_damage_multiplier),
            sg_damage_exponent: o.sg_damage_exponent.or(base.sg_damage_exponent),
        };
        ScenarioConfig {
            allow_cdr: self.allow_cdr,
            allow_sg: self.allow_sg,
            mode: self.t_cap.map_or(Mode::Cba, |t_cap| Mode::Cea { t_cap }),
            baseline: self.baseline,
            overrides,
        }
    }
}

fn default_seed() -> u64 {
    OptimizeOptions::default().seed
}

/// What to run and where to put the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Parameter file; the bundled calibration when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pg_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multistarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioSpec>,
}

impl RunManifest {
    /// The four portfolios, the six sensitivity cases on the full portfolio,
    /// and 2 degC cost-effectiveness runs for the three portfolios with a
    /// second instrument.
    pub fn default_manifest(output_dir: impl Into<PathBuf>) -> Self {
        let spec = |name: &str, allow_cdr, allow_sg| ScenarioSpec {
            name: name.to_string(),
            allow_cdr,
            allow_sg,
            baseline: false,
            t_cap: None,
            sensitivity: None,
            overrides: Overrides::default(),
        };
        let mut scenarios = vec![
            spec("mitigation", false, false),
            spec("mitigation+cdr", true, false),
            spec("mitigation+sg", false, true),
            spec("full", true, true),
        ];
        for s in SensitivityScenario::ALL {
            scenarios.push(ScenarioSpec {
                sensitivity: Some(s),
                ..spec(&format!("full-{s}"), true, true)
            });
        }
        for (name, cdr, sg) in [
            ("cea-mitigation+cdr", true, false),
            ("cea-mitigation+sg", false, true),
            ("cea-full", true, true),
        ] {
            scenarios.push(ScenarioSpec {
                t_cap: Some(2.0),
                ..spec(name, cdr, sg)
            });
        }
        Self {
            output_dir: output_dir.into(),
            seed: default_seed(),
            params: None,
            pg_tolerance: None,
            cap_tolerance: None,
            multistarts: None,
            max_iterations: None,
            scenarios,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let m: RunManifest = toml::from_str(text).map_err(|e| Error::Schema {
            line: e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1),
            column: 0,
            message: e.message().trim().to_string(),
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::from_toml_str(&text)?;
        // relative paths inside a manifest are relative to the manifest
        if let Some(dir) = path.parent() {
            if m.output_dir.is_relative() {
                m.output_dir = dir.join(&m.output_dir);
            }
            if let Some(p) = m.params.as_mut().filter(|p| p.is_relative()) {
                *p = dir.join(&*p);
            }
        }
        Ok(m)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::validation("scenario", "manifest lists no scenarios"));
        }
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            if s.name.is_empty()
                || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || "+-_.".contains(c))
                || s.name.starts_with('.')
            {
                return Err(Error::validation(
                    "scenario.name",
                    format!(
                        "`{}` must be non-empty and use only letters, digits and + - _ .",
                        s.name
                    ),
                ));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::validation(
                    "scenario.name",
                    format!("duplicate name `{}`", s.name),
                ));
            }
            s.config().validate()?;
        }
        if let Some(t) = self.pg_tolerance {
            if !(t > 0.0) {
                return Err(Error::validation("pg_tolerance", "must be positive"));
            }
        }
        if let Some(t) = self.cap_tolerance {
            if !(t > 0.0) {
                return Err(Error::validation("cap_tolerance", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn options(&self) -> OptimizeOptions {
        let d = OptimizeOptions::default();
        OptimizeOptions {
            pg_tolerance: self.pg_tolerance.unwrap_or(d.pg_tolerance),
            cap_tolerance: self.cap_tolerance.unwrap_or(d.cap_tolerance),
            multistarts: self.multistarts.unwrap_or(d.multistarts),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            seed: self.seed,
            ..d
        }
    }

    pub fn find(&self, name: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }
}
