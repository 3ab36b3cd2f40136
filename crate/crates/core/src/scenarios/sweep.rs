use std::path::Path;

use serde::Serialize;

use super::output::{csv_bytes, write_atomic};
use crate::error::{Error, Result};
use crate::optimizer::{perturb_sg, Solution, Trajectory};
use crate::params::ModelParams;

/// Year at which SG benefits and side effects are decomposed.
pub const DECOMPOSITION_YEAR: i32 = 2050;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub scale: f64,
    pub bge_change_pct: f64,
    /// SG side effects in the decomposition year, percent of gross output.
    pub side_effects_2050_pct_gwp: f64,
    /// Climate damages at scale zero minus at this scale, percent of gross output.
    pub avoided_damages_2050_pct_gwp: f64,
}

/// Scales the SG path of `solution`, holding abatement and savings fixed.
pub fn sweep_sg_scale(
    solution: &Solution,
    baseline: &Trajectory,
    params: &ModelParams,
    scales: &[f64],
) -> Result<Vec<SweepRow>> {
    let (off, _) = perturb_sg(solution, 0.0, baseline, params)?;
    let t = off
        .index_of(DECOMPOSITION_YEAR)
        .ok_or_else(|| Error::validation("horizon", format!("does not include {DECOMPOSITION_YEAR}")))?;
    let damage_off = off.flows[t].climate_damage;
    scales
        .iter()
        .map(|&scale| {
            let (traj, bge) = perturb_sg(solution, scale, baseline, params)?;
            let f = &traj.flows[t];
            Ok(SweepRow {
                scale,
                bge_change_pct: bge,
                side_effects_2050_pct_gwp: 100.0 * f.sg_damage,
                avoided_damages_2050_pct_gwp: 100.0 * (damage_off - f.climate_damage),
            })
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_atomic(path, &csv_bytes(rows)?)
}
