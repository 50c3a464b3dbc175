//! Plan comparison table and sensitivity grids.

use serde::Serialize;

use crate::error::Result;
use crate::pso::ConstraintSet;
use crate::scenario::{PlanOptimum, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    pub plan_id: String,
    pub retailer: String,
    pub tariff: String,
    pub is_base: bool,
    pub panels: u32,
    pub size_kw: f64,
    pub tilt_deg: f64,
    pub azimuth_deg: f64,
    pub npv: f64,
    pub mirr_annual: Option<f64>,
    pub payback_years: Option<f64>,
    pub plan_saving: f64,
    pub viable: bool,
    pub best: bool,
}

/// NPV of the best array under the base plan, or 0 if none pays off.
pub fn baseline_npv(scenario: &Scenario, optima: &[PlanOptimum]) -> f64 {
    optima
        .iter()
        .find(|o| o.plan == scenario.base_plan)
        .map_or(0.0, |o| o.npv.max(0.0))
}

/// Re-evaluate each plan's optimum and assemble the comparison rows.
pub fn plan_results(scenario: &Scenario, optima: &[PlanOptimum], constraints: &ConstraintSet) -> Result<Vec<PlanResult>> {
    let baseline = baseline_npv(scenario, optima);
    let mut rows = optima
        .iter()
        .map(|o| plan_result(scenario, o.plan, o.tilt_deg, o.azimuth_deg, o.panels, constraints, baseline))
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.viable)
        .max_by(|a, b| a.1.npv.total_cmp(&b.1.npv).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i);
    if let Some(i) = best {
        rows[i].best = true;
    }
    Ok(rows)
}

pub fn plan_result(
    scenario: &Scenario,
    plan: usize,
    tilt_deg: f64,
    azimuth_deg: f64,
    panels: u32,
    constraints: &ConstraintSet,
    baseline_npv: f64,
) -> Result<PlanResult> {
    let cf = scenario.evaluate(plan, tilt_deg, azimuth_deg, panels, constraints, baseline_npv)?;
    let p = &scenario.plans[plan];
    Ok(PlanResult {
        plan_id: p.id.clone(),
        retailer: p.retailer.clone(),
        tariff: p.kind.to_string(),
        is_base: plan == scenario.base_plan,
        panels,
        size_kw: panels as f64 * scenario.panel.rated_power_w / 1000.0,
        tilt_deg,
        azimuth_deg,
        npv: cf.npv,
        mirr_annual: cf.mirr_annual,
        payback_years: cf.payback_years,
        plan_saving: cf.plan_saving,
        viable: cf.npv > 0.0,
        best: false,
    })
}

fn money(v: f64) -> String {
    format!("{v:.2}")
}

fn percent(v: Option<f64>) -> String {
    v.map_or("-".into(), |m| format!("{:.2}", 100.0 * m))
}

fn angle(v: f64) -> String {
    // adding 0.0 turns -0 into 0
    format!("{}", v.round() + 0.0)
}

fn years(v: Option<f64>) -> String {
    v.map_or("-".into(), |y| format!("{y:.2}"))
}

const COLUMNS: [&str; 11] = [
    "plan", "retailer", "tariff", "size_kw", "tilt_deg", "azimuth_deg", "npv", "mirr_pct", "payback_years",
    "plan_saving", "best",
];

fn cells(r: &PlanResult) -> Vec<String> {
    let mut out = vec![r.plan_id.clone(), r.retailer.clone(), r.tariff.clone()];
    if r.viable {
        out.extend([
            format!("{:.2}", r.size_kw),
            angle(r.tilt_deg),
            angle(r.azimuth_deg),
            money(r.npv),
            percent(r.mirr_annual),
            years(r.payback_years),
            money(r.plan_saving),
        ]);
    } else {
        out.extend(std::iter::repeat_n("-".to_string(), 7));
    }
    out.push(if r.best { "*".into() } else { String::new() });
    out
}

pub fn plan_table_csv(rows: &[PlanResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record(cells(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Fixed-width table; the best plan is starred and the base plan tagged.
pub fn plan_table_text(rows: &[PlanResult]) -> String {
    let headers = ["Plan", "Retailer", "Tariff", "Size (kW)", "Tilt", "Azimuth", "NPV", "MIRR (%)", "Payback (yr)", "Plan saving", ""];
    let mut table: Vec<Vec<String>> = vec![headers.iter().map(|h| h.to_string()).collect()];
    for r in rows {
        let mut c = cells(r);
        if r.is_base {
            c[0] = format!("{} (base)", c[0]);
        }
        table.push(c);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|j| table.iter().map(|row| row[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| if j < 3 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
            out.push('\n');
        }
    }
    if rows.iter().any(|r| r.best) {
        out.push_str("* highest NPV\n");
    }
    if rows.iter().any(|r| !r.viable) {
        out.push_str("- no positive-NPV system on this plan\n");
    }
    out
}

pub fn sweep_size_csv(rows: &[(u32, f64)], rated_power_w: f64) -> String {
    let mut out = String::from("z,size_kw,npv\n");
    for (z, npv) in rows {
        out.push_str(&format!("{z},{:.2},{:.2}\n", *z as f64 * rated_power_w / 1000.0, npv));
    }
    out
}

pub fn sweep_orientation_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("tilt,azimuth,npv\n");
    for (t, a, npv) in rows {
        out.push_str(&format!("{},{},{:.2}\n", angle(*t), angle(*a), npv));
    }
    out
}

/// Best NPV after each swarm iteration, one row per plan and iteration.
pub fn convergence_csv(scenario: &Scenario, optima: &[PlanOptimum]) -> String {
    let mut out = String::from("plan,iteration,best_npv\n");
    for o in optima {
        for (i, score) in o.run.history.iter().enumerate() {
            out.push_str(&format!("{},{i},{:.6}\n", scenario.plans[o.plan].id, -score));
        }
    }
    out
}
