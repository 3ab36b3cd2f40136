//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use dicesg_core::climate::CO2_PER_C;
use dicesg_core::metrics::{self, argmax, net_zero_index};
use dicesg_core::optimizer::{optimize_cea, Model, MU_MAX, SRM_MAX};
use dicesg_core::scenarios::{policy_cost_fraction, run_manifest, sweep_sg_scale, RunManifest, ScenarioSpec};
use dicesg_core::{
    optimize_with, CeaOutcome, ControlPath, Mode, ModelParams, OptimizeOptions, Overrides, ScenarioConfig,
    SensitivityScenario, Solution, Trajectory,
};
use rayon::prelude::*;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Portfolio {
    Baseline,
    Mitigation,
    MitigationCdr,
    MitigationSg,
    Full,
}

impl Portfolio {
    const ALL: [Portfolio; 5] = [
        Self::Baseline,
        Self::Mitigation,
        Self::MitigationCdr,
        Self::MitigationSg,
        Self::Full,
    ];

    fn config(self) -> ScenarioConfig {
        match self {
            Self::Baseline => ScenarioConfig::baseline(),
            Self::Mitigation => ScenarioConfig::mitigation_only(),
            Self::MitigationCdr => ScenarioConfig::mitigation_cdr(),
            Self::MitigationSg => ScenarioConfig::mitigation_sg(),
            Self::Full => ScenarioConfig::full(),
        }
    }
}

/// `None` is the default calibration.
type Variant = Option<SensitivityScenario>;

fn variant_name(v: Variant) -> String {
    v.map_or("Default".to_string(), |s| s.to_string())
}

fn variants() -> Vec<Variant> {
    std::iter::once(None)
        .chain(SensitivityScenario::ALL.map(Some))
        .collect()
}

struct Solved {
    solution: Result<Solution, String>,
    elapsed: Duration,
}

struct Cea {
    outcome: Result<CeaOutcome, String>,
    elapsed: Duration,
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, text: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id:<4} {text}", if pass { "PASS" } else { "FAIL" });
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn year_of(t: &Trajectory, year: i32) -> usize {
    t.index_of(year).expect("year inside horizon")
}

fn window(t: &Trajectory, from: i32, to: i32) -> Vec<f64> {
    let temps = t.t_atm();
    temps[year_of(t, from)..=year_of(t, to)].to_vec()
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

fn peak_removal(t: &Trajectory) -> (i32, f64) {
    let removal: Vec<f64> = t.industrial_emissions().iter().map(|e| -e).collect();
    let i = argmax(&removal);
    (t.year(i), removal[i])
}

struct Peaks {
    emissions: i32,
    net_zero: Option<i32>,
    cdr: (i32, f64),
    sg: (i32, f64),
    temperature: (i32, f64),
}

fn peaks(t: &Trajectory) -> Peaks {
    let e = t.industrial_emissions();
    let temps = t.t_atm();
    let s = argmax(&t.controls.srm);
    let pt = argmax(&temps);
    Peaks {
        emissions: t.year(argmax(&e)),
        net_zero: net_zero_index(&e).map(|i| t.year(i)),
        cdr: peak_removal(t),
        sg: (t.year(s), t.controls.srm[s]),
        temperature: (t.year(pt), temps[pt]),
    }
}

fn tax_and_scc_2030(p: &ModelParams, s: &Solution) -> (f64, f64) {
    let model = Model::new(p, &s.config);
    let t = year_of(&s.trajectory, 2030);
    let tax = metrics::carbon_tax_series(&model, &s.trajectory)[t];
    let scc = metrics::scc_adjoint(&model, &s.trajectory)[t];
    (tax, scc)
}

/// Independent five-year DICE2016R2 run with fixed abatement and savings;
/// returns atmospheric temperature at each node.
fn dice2016_five_year_temperatures(nodes: usize, mu: f64, savings: f64) -> Vec<f64> {
    let (gama, dk, a2, expcost2): (f64, f64, f64, f64) = (0.3, 0.1, 0.00236, 2.8);
    let (popasym, popadj) = (11500.0, 0.134);
    let (ga0, dela) = (0.076, 0.005);
    let (gsigma1, dsig): (f64, f64) = (-0.0152, -0.001);
    let (eland0, deland): (f64, f64) = (2.6, 0.115);
    let (pback, gback): (f64, f64) = (550.0, 0.025);
    let (fex0, fex1) = (0.5, 1.0);
    let (fco22x, t2xco2, mateq) = (3.6813, 3.1, 588.0);
    let (c1, c3, c4) = (0.1005, 0.088, 0.025);
    let (b12, b23) = (0.12, 0.007);
    let (mateq_up, mleq) = (360.0, 1720.0);
    let b11 = 1.0 - b12;
    let b21 = b12 * mateq / mateq_up;
    let b22 = 1.0 - b21 - b23;
    let b32 = b23 * mateq_up / mleq;
    let b33 = 1.0 - b32;

    let step: f64 = 5.0;
    let mut l: f64 = 7403.0;
    let mut al: f64 = 5.115;
    let mut sigma: f64 = 35.85 / (105.5 * (1.0 - 0.03));
    let mut gsig: f64 = gsigma1;
    let mut k: f64 = 223.0;
    let (mut mat, mut mup, mut mlo) = (851.0, 460.0, 1740.0);
    let (mut tatm, mut toc): (f64, f64) = (0.85, 0.0068);
    let forcoth = |n: usize| {
        if n < 17 {
            fex0 + (fex1 - fex0) * n as f64 / 17.0
        } else {
            fex1
        }
    };

    let mut out = vec![tatm];
    for n in 0..nodes {
        let ygross = al * k.powf(gama) * (l / 1000.0).powf(1.0 - gama);
        let cost1 = pback * (1.0 - gback).powi(n as i32) * sigma / expcost2 / 1000.0;
        let ynet = ygross * (1.0 - a2 * tatm * tatm);
        let y = ynet - ygross * cost1 * mu.powf(expcost2);
        let e = sigma * ygross * (1.0 - mu) + eland0 * (1.0 - deland).powi(n as i32);

        let mat_next = mat * b11 + mup * b21 + e * step / CO2_PER_C;
        let mup_next = mat * b12 + mup * b22 + mlo * b32;
        let mlo_next = mup * b23 + mlo * b33;
        let forc_next = fco22x * (mat_next / mateq).log2() + forcoth(n + 1);
        let tatm_next = tatm + c1 * (forc_next - fco22x / t2xco2 * tatm - c3 * (tatm - toc));
        let toc_next = toc + c4 * (tatm - toc);

        k = (1.0 - dk).powf(step) * k + step * savings * y;
        let ga = ga0 * (-dela * step * n as f64).exp();
        al /= 1.0 - ga;
        l *= (popasym / l).powf(popadj);
        sigma *= (gsig * step).exp();
        gsig *= (1.0 + dsig).powf(step);
        (mat, mup, mlo, tatm, toc) = (mat_next, mup_next, mlo_next, tatm_next, toc_next);
        out.push(tatm);
    }
    out
}

fn main() {
    let started = Instant::now();
    let params = ModelParams::dice2016r2().expect("bundled parameters load");
    let p = &params;
    let opts = OptimizeOptions {
        multistarts: 0,
        ..OptimizeOptions::default()
    };
    let mut r = Report { failures: 0 };

    let jobs: Vec<(Variant, Portfolio)> = variants()
        .into_iter()
        .flat_map(|v| Portfolio::ALL.map(|q| (v, q)))
        .collect();
    let solved: BTreeMap<(Variant, Portfolio), Solved> = jobs
        .into_par_iter()
        .map(|(v, q)| {
            let overrides = v.map(|s| s.overrides()).unwrap_or_default();
            let config = q.config().with_overrides(overrides);
            let t0 = Instant::now();
            let solution = optimize_with(&config, p, &opts).map_err(|e| e.to_string());
            (
                (v, q),
                Solved {
                    solution,
                    elapsed: t0.elapsed(),
                },
            )
        })
        .collect();
    let cea: BTreeMap<Portfolio, Cea> = [
        Portfolio::Mitigation,
        Portfolio::MitigationCdr,
        Portfolio::MitigationSg,
        Portfolio::Full,
    ]
    .into_par_iter()
    .map(|q| {
        let config = q.config().with_mode(Mode::Cea { t_cap: 2.0 });
        let t0 = Instant::now();
        let outcome = optimize_cea(&config, p, &opts).map_err(|e| e.to_string());
        (
            q,
            Cea {
                outcome,
                elapsed: t0.elapsed(),
            },
        )
    })
    .collect();

    let get = |v: Variant, q: Portfolio| -> Option<&Solution> { solved[&(v, q)].solution.as_ref().ok() };
    for ((v, q), s) in &solved {
        if let Err(e) = &s.solution {
            println!("note {} {:?}: {e}", variant_name(*v), q);
        }
    }

    println!("-- quantitative");
    // 1
    match (get(None, Portfolio::Mitigation), get(None, Portfolio::Baseline)) {
        (Some(m), Some(_)) => {
            let (lo, hi) = min_max(&window(&m.trajectory, 2150, 2300));
            let nz = peaks(&m.trajectory).net_zero;
            let ok = within(lo, 4.0, 0.4) && within(hi, 4.0, 0.4) && nz.is_some_and(|y| (y - 2120).abs() <= 15);
            r.line("C1", ok, format!("mitigation-only: T_atm over 2150-2300 in [{lo:.2}, {hi:.2}] degC (4.0 +/- 0.4), net-zero {nz:?} (2120 +/- 15)"));
        }
        _ => r.line("C1", false, "mitigation-only optimum unavailable".into()),
    }
    // 2
    match (get(None, Portfolio::Mitigation), get(None, Portfolio::MitigationSg)) {
        (Some(m), Some(sg)) => {
            let (lo, hi) = min_max(&window(&sg.trajectory, 2150, 2300));
            let (tax_m, scc_m) = tax_and_scc_2030(p, m);
            let (tax_s, scc_s) = tax_and_scc_2030(p, sg);
            let dtax = 100.0 * (1.0 - tax_s / tax_m);
            let dscc = 100.0 * (1.0 - scc_s / scc_m);
            let ok =
                within(lo, 3.0, 0.4) && within(hi, 3.0, 0.4) && within(dtax, 30.0, 10.0) && within(dscc, 30.0, 10.0);
            r.line("C2", ok, format!("mitigation+SG: T_atm over 2150-2300 in [{lo:.2}, {hi:.2}] degC (3.0 +/- 0.4); 2030 tax {tax_s:.1} vs {tax_m:.1} USD/tCO2 ({dtax:.1}% lower), 2030 SCC {scc_s:.1} vs {scc_m:.1} ({dscc:.1}% lower), each 30 +/- 10"));
        }
        _ => r.line("C2", false, "mitigation+SG optimum unavailable".into()),
    }
    // 3
    match (get(None, Portfolio::Mitigation), get(None, Portfolio::MitigationCdr)) {
        (Some(m), Some(c)) => {
            let (tax_m, _) = tax_and_scc_2030(p, m);
            let (tax_c, _) = tax_and_scc_2030(p, c);
            let dtax = 100.0 * (1.0 - tax_c / tax_m);
            let late = window(&c.trajectory, 2200, 2300);
            let declining = late.windows(2).all(|w| w[1] < w[0]);
            let peak = peaks(&c.trajectory).temperature.1;
            let t_end = *late.last().unwrap();
            let ok = within(dtax, 3.0, 3.0) && declining && t_end < 0.25 * peak;
            r.line("C3", ok, format!("mitigation+CDR: 2030 tax {dtax:.2}% lower (3 +/- 3); T_atm falls every year 2200-2300 ({declining}) to {t_end:.2} degC by 2300, peak {peak:.2}"));
        }
        _ => r.line("C3", false, "mitigation+CDR optimum unavailable".into()),
    }
    // 4
    match get(None, Portfolio::Full) {
        Some(f) => {
            let pk = peaks(&f.trajectory);
            let cum = f
                .trajectory
                .industrial_emissions()
                .iter()
                .filter(|e| **e > 0.0)
                .sum::<f64>()
                / 1000.0;
            let ok = pk.net_zero.is_some_and(|y| (y - 2142).abs() <= 15)
                && within(pk.sg.1, 1.98, 0.5)
                && (pk.sg.0 - 2143).abs() <= 20
                && within(pk.temperature.1, 3.1, 0.3)
                && (pk.emissions - 2057).abs() <= 10
                && within(cum, 4.0, 1.0);
            r.line("C4", ok, format!(
                "full portfolio: net-zero {:?} (2142 +/- 15), peak SG {:.2} W/m2 (1.98 +/- 0.5) in {} (2143 +/- 20), peak T {:.2} degC (3.1 +/- 0.3), peak emissions {} (2057 +/- 10), cumulative {cum:.2} TtCO2 (4.0 +/- 1.0)",
                pk.net_zero, pk.sg.1, pk.sg.0, pk.temperature.1, pk.emissions
            ));
        }
        None => r.line("C4", false, "full-portfolio optimum unavailable".into()),
    }
    // 5
    let s = |x| Some(x);
    match (
        get(s(SensitivityScenario::S1), Portfolio::Full),
        get(s(SensitivityScenario::S2), Portfolio::Full),
        get(s(SensitivityScenario::S6), Portfolio::Full),
    ) {
        (Some(s1), Some(s2), Some(s6)) => {
            let (a, b, c) = (peaks(&s1.trajectory), peaks(&s2.trajectory), peaks(&s6.trajectory));
            let later = a.emissions > b.emissions
                && a.net_zero.zip(b.net_zero).is_some_and(|(x, y)| x > y)
                && a.cdr.0 > b.cdr.0
                && a.sg.0 > b.sg.0
                && a.temperature.0 > b.temperature.0;
            let dcdr = 100.0 * (a.cdr.1 / b.cdr.1 - 1.0);
            let dsg = 100.0 * (a.sg.1 / b.sg.1 - 1.0);
            let ok_s1s2 = later && within(dcdr, 44.0, 15.0) && within(dsg, 10.0, 10.0);
            let ok_s6 = c.sg.1 >= 5.0 && c.temperature.1 <= 1.5;
            r.line("C5", ok_s1s2 && ok_s6, format!(
                "S1 vs S2: peak years later ({later}: emissions {}/{}, net-zero {:?}/{:?}, CDR {}/{}, SG {}/{}, T {}/{}); peak CDR {:.1}/{:.1} GtCO2 (+{dcdr:.1}%, 44 +/- 15); peak SG {:.2}/{:.2} W/m2 (+{dsg:.1}%, 10 +/- 10); S6 peak SG {:.2} W/m2 (>= 5), peak T {:.2} degC (<= 1.5)",
                a.emissions, b.emissions, a.net_zero, b.net_zero, a.cdr.0, b.cdr.0, a.sg.0, b.sg.0, a.temperature.0, b.temperature.0,
                a.cdr.1, b.cdr.1, a.sg.1, b.sg.1, c.sg.1, c.temperature.1
            ));
        }
        _ => r.line("C5", false, "sensitivity optima unavailable".into()),
    }
    // 6
    {
        let peak_cost = |s: &Solution| {
            let costs: Vec<f64> = s.trajectory.flows.iter().map(policy_cost_fraction).collect();
            let i = argmax(&costs);
            (s.trajectory.year(i), 100.0 * costs[i])
        };
        let feasible = |q| match &cea[&q].outcome {
            Ok(CeaOutcome::Feasible(s)) => Some(s.as_ref()),
            _ => None,
        };
        let m_infeasible = matches!(cea[&Portfolio::Mitigation].outcome, Ok(CeaOutcome::Infeasible { .. }));
        let m_gap = match &cea[&Portfolio::Mitigation].outcome {
            Ok(CeaOutcome::Infeasible { min_max_violation, .. }) => {
                format!("{min_max_violation:.2} degC over the cap at best")
            }
            Ok(CeaOutcome::Feasible(_)) => "feasible".into(),
            Err(e) => e.clone(),
        };
        match (feasible(Portfolio::MitigationCdr), feasible(Portfolio::MitigationSg), feasible(Portfolio::Full)) {
            (Some(c), sg, Some(f)) => {
                let nz = peaks(&c.trajectory).net_zero;
                let (cy, cc) = peak_cost(c);
                let (fy, fc) = peak_cost(f);
                let ok = m_infeasible && nz.is_some_and(|y| (y - 2050).abs() <= 10) && within(cc, 6.0, 2.0) && sg.is_some() && fc < cc;
                r.line("C6", ok, format!(
                    "2 degC cap: mitigation-only infeasible ({m_gap}); mitigation+CDR net-zero {nz:?} (2050 +/- 10), peak cost {cc:.2}% of GWP in {cy} (6 +/- 2); mitigation+SG feasible ({}); full peak cost {fc:.2}% in {fy} (< {cc:.2})",
                    sg.is_some()
                ));
            }
            _ => r.line("C6", false, format!(
                "2 degC cap: mitigation-only {m_gap}; mitigation+CDR feasible {}, mitigation+SG feasible {}, full feasible {}",
                feasible(Portfolio::MitigationCdr).is_some(),
                feasible(Portfolio::MitigationSg).is_some(),
                feasible(Portfolio::Full).is_some()
            )),
        }
    }
    // runtime budget
    {
        let slowest = solved
            .values()
            .map(|s| s.elapsed)
            .chain(cea.values().map(|c| c.elapsed))
            .max()
            .unwrap_or_default();
        r.line(
            "T",
            slowest <= Duration::from_secs(300),
            format!("slowest single optimization {:.1} s (<= 300 s)", slowest.as_secs_f64()),
        );
    }

    println!("-- properties");
    // 7
    {
        let mut worst_col = 0.0f64;
        for j in 0..3 {
            let sum: f64 = (0..3).map(|i| p.climate.carbon_transfer[i][j]).sum();
            worst_col = worst_col.max((sum - 1.0).abs());
        }
        let model = Model::new(p, &ScenarioConfig::full());
        let mut worst = 0.0f64;
        for (mu, srm) in [(0.03, 0.0), (0.6, 1.0), (1.8, 3.0)] {
            let traj = model.run(&ControlPath::constant(p.horizon(), mu, 0.25, srm), None);
            let Ok(traj) = traj else { continue };
            for t in 0..traj.len() - 1 {
                let before = traj.climate[t].total_carbon();
                let after = traj.climate[t + 1].total_carbon();
                let added = traj.flows[t].emissions / CO2_PER_C;
                worst = worst.max((after - before - added).abs() / after);
            }
        }
        r.line("C7", worst <= 1e-9 && worst_col <= 1e-12, format!("carbon conservation worst relative error {worst:.2e} (<= 1e-9); column-sum error {worst_col:.2e} (<= 1e-12)"));
    }
    // 8
    {
        let c = &p.calibration;
        let root_ok = c.carbon_root_residual <= 1e-6;
        let savings = (0.1 + 0.004) / (0.1 + 0.004 * 1.45 + 0.015) * 0.3;
        let nodes = p.horizon() / 5;
        let oracle = dice2016_five_year_temperatures(nodes, 0.03, savings);
        let model = Model::new(p, &ScenarioConfig::baseline());
        let traj = model
            .run(&ControlPath::constant(p.horizon(), 0.03, savings, 0.0), None)
            .expect("baseline path simulates");
        let dev = (0..nodes)
            .map(|k| (traj.climate[5 * k].t_atm - oracle[k]).abs())
            .fold(0.0, f64::max);
        let early = (0..=7)
            .map(|k| (traj.climate[5 * k].t_atm - oracle[k]).abs())
            .fold(0.0, f64::max);
        r.line("C8", dev <= 0.05 && (root_ok || c.carbon_root_method != dicesg_core::annualize::RootMethod::PrincipalRoot), format!(
            "one-year carbon matrix: {:?}, max |Phi^5 - Phi5| {:.2e} ({}); baseline T_atm vs independent five-year run: max node gap {dev:.4} degC over {nodes} nodes (<= 0.05), {early:.4} through 2050",
            c.carbon_root_method,
            c.carbon_root_residual,
            if root_ok { "<= 1e-6" } else { "no nonnegative exact root, fitted path" }
        ));
    }
    // 9
    match get(None, Portfolio::Full) {
        Some(f) => {
            let model = Model::new(p, &f.config);
            let adj = metrics::scc_adjoint(&model, &f.trajectory);
            let eta = model.econ.elasticity_marginal_utility;
            let mut worst = 0.0f64;
            let mut text = Vec::new();
            for year in [2030, 2050, 2100] {
                let t = year_of(&f.trajectory, year);
                let pulsed = model.run(&f.trajectory.controls, Some((t, 1.0))).expect("pulsed run");
                let dj_de = pulsed.objective - f.trajectory.objective;
                let c = f.trajectory.flows[t].per_capita_consumption;
                let dj_dc = model.objective_weights()[t] * 1000.0 * c.powf(-eta);
                let fd = -1000.0 * dj_de / dj_dc;
                let rel = (adj[t] - fd).abs() / fd.abs();
                worst = worst.max(rel);
                text.push(format!("{year}: {:.2} vs {fd:.2}", adj[t]));
            }
            r.line(
                "C9",
                worst <= 0.01,
                format!(
                    "SCC adjoint vs 1 GtCO2 pulse, full portfolio ({}), worst {:.3}% (<= 1%)",
                    text.join(", "),
                    100.0 * worst
                ),
            );
        }
        None => r.line("C9", false, "full-portfolio optimum unavailable".into()),
    }
    // 10
    {
        let mut ok = true;
        let mut parts = Vec::new();
        for v in variants() {
            let b = |q| get(v, q);
            match (
                b(Portfolio::Baseline),
                b(Portfolio::Mitigation),
                b(Portfolio::MitigationCdr),
                b(Portfolio::MitigationSg),
                b(Portfolio::Full),
            ) {
                (Some(base), Some(m), Some(c), Some(sg), Some(f)) => {
                    let model = Model::new(p, &f.config);
                    let g = |s: &Solution| metrics::bge(&model, &s.trajectory, &base.trajectory);
                    let (gm, gc, gs, gf) = (g(m), g(c), g(sg), g(f));
                    let good = gf > gc && gc > 0.0 && gf > gs && gs > 0.0 && gm > 0.0;
                    ok &= good;
                    parts.push(format!(
                        "{} full {gf:.3} cdr {gc:.3} sg {gs:.3} m {gm:.3}{}",
                        variant_name(v),
                        if good { "" } else { " (violated)" }
                    ));
                }
                _ => {
                    ok = false;
                    parts.push(format!("{} unavailable", variant_name(v)));
                }
            }
        }
        r.line("C10", ok, format!("BGE vs baseline, percent: {}", parts.join("; ")));
    }
    // 11
    {
        let mut ok = true;
        let mut parts = Vec::new();
        for v in variants().into_iter().filter(|v| *v != Some(SensitivityScenario::S6)) {
            let Some(f) = get(v, Portfolio::Full) else {
                ok = false;
                parts.push(format!("{} unavailable", variant_name(v)));
                continue;
            };
            let t = &f.trajectory;
            let pk = peaks(t);
            let entry = t.controls.srm.iter().position(|x| *x > 0.05).map(|i| t.year(i));
            let late = t.controls.srm[t.len() - 50];
            let good = match (entry, pk.net_zero) {
                (Some(e), Some(nz)) => nz - e >= 30 && (pk.sg.0 - nz).abs() <= 20 && late < pk.sg.1,
                _ => false,
            };
            ok &= good;
            parts.push(format!(
                "{} SG>0.05 from {entry:?}, net-zero {:?}, SG peak {}, SG {late:.2} at {} vs peak {:.2}{}",
                variant_name(v),
                pk.net_zero,
                pk.sg.0,
                t.year(t.len() - 50),
                pk.sg.1,
                if good { "" } else { " (violated)" }
            ));
        }
        r.line(
            "C11",
            ok,
            format!(
                "SG leads net-zero by >= 30 yr, peaks within 20 yr of it, and phases down: {}",
                parts.join("; ")
            ),
        );
    }
    // 12
    match (get(None, Portfolio::Full), get(None, Portfolio::Baseline)) {
        (Some(f), Some(base)) => {
            let scales: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
            match sweep_sg_scale(f, &base.trajectory, p, &scales) {
                Ok(rows) => {
                    let bge: Vec<f64> = rows.iter().map(|r| r.bge_change_pct).collect();
                    let top = argmax(&bge);
                    let unimodal =
                        bge[..=top].windows(2).all(|w| w[1] > w[0]) && bge[top..].windows(2).all(|w| w[1] < w[0]);
                    let avoided: Vec<f64> = rows.iter().map(|r| r.avoided_damages_2050_pct_gwp).collect();
                    let concave = avoided.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] <= 1e-12);
                    let side1 = rows[20].side_effects_2050_pct_gwp;
                    let quad = rows
                        .iter()
                        .map(|r| (r.side_effects_2050_pct_gwp - r.scale * r.scale * side1).abs() / side1)
                        .fold(0.0, f64::max);
                    let ok = unimodal && (0.9..=1.1).contains(&scales[top]) && concave && quad <= 1e-12;
                    r.line("C12", ok, format!(
                        "SG scale sweep 0..2: BGE unimodal ({unimodal}) with maximum at {:.2} (0.9..1.1); 2050 avoided damages concave ({concave}); side effects quadratic, worst relative gap {quad:.1e}",
                        scales[top]
                    ));
                }
                Err(e) => r.line("C12", false, format!("sweep failed: {e}")),
            }
        }
        _ => r.line("C12", false, "full-portfolio optimum unavailable".into()),
    }
    // 13
    {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let spec = |name: &str, cdr: bool, sg: bool| ScenarioSpec {
            name: name.into(),
            allow_cdr: cdr,
            allow_sg: sg,
            baseline: false,
            t_cap: None,
            sensitivity: None,
            overrides: Overrides::default(),
        };
        let mut outcome = Ok(());
        for d in &dirs {
            let mut m = RunManifest::default_manifest(d.path());
            m.multistarts = Some(1);
            m.scenarios = vec![spec("mitigation", false, false), spec("full", true, true)];
            if let Err(e) = run_manifest(&m, p) {
                outcome = Err(e.to_string());
            }
        }
        let files = [
            "run.log",
            "mitigation/trajectory.csv",
            "mitigation/summary.csv",
            "full/trajectory.csv",
            "full/summary.csv",
        ];
        let same = outcome.is_ok()
            && files.iter().all(|f| {
                let a = std::fs::read(dirs[0].path().join(f));
                let b = std::fs::read(dirs[1].path().join(f));
                matches!((a, b), (Ok(a), Ok(b)) if a == b)
            });
        r.line(
            "C13",
            same,
            format!(
                "two runs of the same manifest and seed give byte-identical outputs ({} files){}",
                files.len(),
                outcome.err().map(|e| format!(": {e}")).unwrap_or_default()
            ),
        );
    }
    // 14
    {
        let mut mu_max = 0.0f64;
        let mut srm_max = 0.0f64;
        let mut count = 0;
        let all = solved.values().filter_map(|s| s.solution.as_ref().ok()).chain(
            cea.values()
                .filter_map(|c| c.outcome.as_ref().ok().and_then(|o| o.solution())),
        );
        for s in all {
            count += 1;
            mu_max = s.controls.mu.iter().fold(mu_max, |a, &b| a.max(b));
            srm_max = s.controls.srm.iter().fold(srm_max, |a, &b| a.max(b));
        }
        let ok = mu_max < MU_MAX * (1.0 - 1e-6) && srm_max < SRM_MAX * (1.0 - 1e-6);
        r.line("C14", ok, format!("over {count} optima: largest mu {mu_max:.3} (bound {MU_MAX}), largest SG {srm_max:.3} W/m2 (bound {SRM_MAX})"));
    }

    println!("{} failure(s), {:.0} s", r.failures, started.elapsed().as_secs_f64());
    if r.failures > 0 {
        std::process::exit(1);
    }
}
