use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::ScenarioSummary;
use crate::optimizer::Trajectory;

/// Column order of `trajectory.csv`.
pub const TRAJECTORY_COLUMNS: &[&str] = &[
    "year",
    "mu",
    "savings",
    "srm_wm2",
    "industrial_emissions_gtco2",
    "total_emissions_gtco2",
    "m_at_gtc",
    "m_up_gtc",
    "m_lo_gtc",
    "co2_forcing_wm2",
    "exogenous_forcing_wm2",
    "sg_forcing_wm2",
    "total_forcing_wm2",
    "t_atm_c",
    "t_ocean_c",
    "gross_output",
    "climate_damage_frac",
    "sg_damage_frac",
    "abatement_cost_frac",
    "policy_cost_frac",
    "climate_damage_cost",
    "sg_damage_cost",
    "abatement_cost",
    "net_output",
    "consumption",
    "per_capita_consumption",
    "capital",
    "carbon_tax_usd_tco2",
    "scc_usd_tco2",
    "seed",
];

/// One row of `trajectory.csv`. Money in trillions of 2010 USD per year,
/// per-capita consumption in thousands, prices in 2010 USD/tCO2.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub year: i32,
    pub mu: f64,
    pub savings: f64,
    pub srm_wm2: f64,
    pub industrial_emissions_gtco2: f64,
    pub total_emissions_gtco2: f64,
    pub m_at_gtc: f64,
    pub m_up_gtc: f64,
    pub m_lo_gtc: f64,
    pub co2_forcing_wm2: f64,
    pub exogenous_forcing_wm2: f64,
    /// Negative of the SG forcing.
    pub sg_forcing_wm2: f64,
    pub total_forcing_wm2: f64,
    pub t_atm_c: f64,
    pub t_ocean_c: f64,
    pub gross_output: f64,
    pub climate_damage_frac: f64,
    pub sg_damage_frac: f64,
    pub abatement_cost_frac: f64,
    /// Abatement cost plus SG side effects over gross output.
    pub policy_cost_frac: f64,
    pub climate_damage_cost: f64,
    pub sg_damage_cost: f64,
    pub abatement_cost: f64,
    pub net_output: f64,
    pub consumption: f64,
    pub per_capita_consumption: f64,
    pub capital: f64,
    pub carbon_tax_usd_tco2: f64,
    pub scc_usd_tco2: f64,
    pub seed: u64,
}

/// Abatement cost plus SG side effects as a fraction of gross output.
pub fn policy_cost_fraction(f: &crate::economy::YearFlows) -> f64 {
    f.abatement_cost * (1.0 - f.climate_damage - f.sg_damage) + f.sg_damage
}

impl TrajectoryRow {
    pub fn rows(traj: &Trajectory, carbon_tax: &[f64], scc: &[f64], seed: u64) -> Vec<Self> {
        (0..traj.len())
            .map(|t| {
                let f = &traj.flows[t];
                let c = &traj.climate[t];
                let y = f.gross_output;
                Self {
                    year: traj.year(t),
                    mu: traj.controls.mu[t],
                    savings: traj.controls.savings[t],
                    srm_wm2: traj.controls.srm[t],
                    industrial_emissions_gtco2: f.industrial_emissions,
                    total_emissions_gtco2: f.emissions,
                    m_at_gtc: c.m_at,
                    m_up_gtc: c.m_up,
                    m_lo_gtc: c.m_lo,
                    co2_forcing_wm2: traj.co2_forcing[t],
                    exogenous_forcing_wm2: traj.exogenous_forcing[t],
                    sg_forcing_wm2: -traj.controls.srm[t],
                    total_forcing_wm2: traj.forcing[t],
                    t_atm_c: c.t_atm,
                    t_ocean_c: c.t_ocean,
                    gross_output: y,
                    climate_damage_frac: f.climate_damage,
                    sg_damage_frac: f.sg_damage,
                    abatement_cost_frac: f.abatement_cost,
                    policy_cost_frac: policy_cost_fraction(f),
                    climate_damage_cost: f.climate_damage * y,
                    sg_damage_cost: f.sg_damage * y,
                    abatement_cost: f.abatement_cost * y * (1.0 - f.climate_damage - f.sg_damage),
                    net_output: f.net_output,
                    consumption: f.consumption,
                    per_capita_consumption: f.per_capita_consumption,
                    capital: traj.capital[t],
                    carbon_tax_usd_tco2: carbon_tax[t],
                    scc_usd_tco2: scc[t],
                    seed,
                }
            })
            .collect()
    }
}

/// Column order of `summary.csv`.
pub const SUMMARY_COLUMNS: &[&str] = &[
    "scenario",
    "portfolio",
    "mode",
    "sensitivity",
    "status",
    "peak_emissions_year",
    "peak_emissions_gtco2",
    "peak_emissions_pct_base",
    "net_zero_year",
    "net_positive_again_year",
    "peak_cdr_year",
    "peak_cdr_gtco2",
    "cumulative_industrial_emissions_ttco2",
    "peak_sg_year",
    "peak_sg_wm2",
    "peak_temperature_year",
    "peak_temperature_c",
    "peak_policy_cost_year",
    "peak_policy_cost_pct_gwp",
    "bge_vs_baseline_pct",
    "carbon_tax_2030",
    "scc_2030",
    "max_cap_violation_c",
    "seed",
];

/// One row of `summary.csv`; empty fields mean "does not occur".
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub portfolio: String,
    pub mode: String,
    pub sensitivity: String,
    pub status: String,
    pub peak_emissions_year: i32,
    pub peak_emissions_gtco2: f64,
    pub peak_emissions_pct_base: f64,
    pub net_zero_year: Option<i32>,
    pub net_positive_again_year: Option<i32>,
    pub peak_cdr_year: Option<i32>,
    pub peak_cdr_gtco2: Option<f64>,
    pub cumulative_industrial_emissions_ttco2: f64,
    pub peak_sg_year: i32,
    pub peak_sg_wm2: f64,
    pub peak_temperature_year: i32,
    pub peak_temperature_c: f64,
    pub peak_policy_cost_year: i32,
    pub peak_policy_cost_pct_gwp: f64,
    pub bge_vs_baseline_pct: f64,
    pub carbon_tax_2030: Option<f64>,
    pub scc_2030: Option<f64>,
    pub max_cap_violation_c: Option<f64>,
    pub seed: u64,
}

impl SummaryRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scenario: &str,
        portfolio: &str,
        mode: String,
        sensitivity: String,
        status: &str,
        summary: &ScenarioSummary,
        traj: &Trajectory,
        max_cap_violation: Option<f64>,
        seed: u64,
    ) -> Self {
        let costs: Vec<f64> = traj.flows.iter().map(policy_cost_fraction).collect();
        let pc = crate::metrics::argmax(&costs);
        let y2030 = traj.index_of(2030);
        Self {
            scenario: scenario.to_string(),
            portfolio: portfolio.to_string(),
            mode,
            sensitivity,
            status: status.to_string(),
            peak_emissions_year: summary.peak_emissions.year,
            peak_emissions_gtco2: summary.peak_emissions.value,
            peak_emissions_pct_base: summary.peak_emissions_pct_base,
            net_zero_year: summary.net_zero_year,
            net_positive_again_year: summary.net_positive_again_year,
            peak_cdr_year: summary.peak_cdr.map(|p| p.year),
            peak_cdr_gtco2: summary.peak_cdr.map(|p| p.value),
            cumulative_industrial_emissions_ttco2: summary.cumulative_industrial_emissions,
            peak_sg_year: summary.peak_sg.year,
            peak_sg_wm2: summary.peak_sg.value,
            peak_temperature_year: summary.peak_temperature.year,
            peak_temperature_c: summary.peak_temperature.value,
            peak_policy_cost_year: traj.year(pc),
            peak_policy_cost_pct_gwp: 100.0 * costs[pc],
            bge_vs_baseline_pct: summary.bge_vs_baseline,
            carbon_tax_2030: y2030.map(|t| summary.carbon_tax[t]),
            scc_2030: y2030.map(|t| summary.scc[t]),
            max_cap_violation_c: max_cap_violation,
            seed,
        }
    }
}

/// Serializes rows to CSV bytes with one header line.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
