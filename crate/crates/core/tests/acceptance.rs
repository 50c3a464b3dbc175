//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvsizing::config::ModelConfig;
use pvsizing::economics::{self, CashFlowResult, EconomicAssumptions};
use pvsizing::insolation::{hourly_diffuse_ratio, hourly_global_ratio, horizontal_hours, transpose, DailyInsolation, HourlyIrradiance};
use pvsizing::pso::{self, ConstraintSet, Discretization, Point, SwarmConfig};
use pvsizing::pv::{hourly_energy, ArrayConfig, PanelSpec, PvModelOptions, TempReference};
use pvsizing::report;
use pvsizing::scenario::{Scenario, ScenarioInputs};
use pvsizing::solar::{self, Orientation, SiteSpec, SolarInstant};
use pvsizing::synthetic;
use pvsizing::tariff::{
    base_period_cost, pv_period_cost, DayKind, DaySet, EnergyBalance, RateWindow, RebateScheme, TariffKind, TariffPlan,
};

const TRANSPOSITION_CASES: usize = 10_000;
const TRANSPOSITION_REL_TOL: f64 = 1e-12;
const TRANSPOSITION_BUDGET: Duration = Duration::from_secs(5);
const PROFILE_SUNSET_ANGLES: [f64; 5] = [60.0, 75.0, 90.0, 105.0, 120.0];
const GLOBAL_PROFILE_TOL: f64 = 0.03;
const DIFFUSE_PROFILE_TOL: f64 = 0.02;
const REDUCTION_CASES: usize = 1000;
const REDUCTION_TOL: f64 = 1e-12;
const PV_POINTS: usize = 100;
const BILLING_FIXTURES: usize = 50;
const NPV_TOL: f64 = 0.01;
const MIRR_TOL: f64 = 1e-4;
const PAYBACK_TOL: f64 = 0.01;
const SPHERE_RUNS: u64 = 100;
const SPHERE_PASSES: usize = 95;
const SPHERE_TARGET: f64 = 1e-6;
const TOY_RUNS: u64 = 100;
const E2E_SEEDS: u64 = 10;
const E2E_FRACTION: f64 = 0.995;
const E2E_PASSES: usize = 9;
const E2E_BUDGET: Duration = Duration::from_secs(300);
const FIG3_BAND: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

enum Line {
    Criterion(&'static str, Outcome),
    /// Reported but not scored.
    Info(&'static str, Outcome),
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_site(r: &mut ChaCha8Rng) -> SiteSpec {
    let lon = r.random_range(-180.0..180.0);
    SiteSpec {
        latitude_deg: r.random_range(-60.0..60.0),
        longitude_deg: lon,
        standard_meridian_deg: (lon / 15.0_f64).round() * 15.0,
        ground_reflectance: r.random_range(0.0..0.6),
        time_basis: Default::default(),
    }
}

fn transposition_identity() -> Outcome {
    let mut r = rng(11);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < TRANSPOSITION_CASES {
        let site = random_site(&mut r);
        let day = r.random_range(1..=365);
        let h0 = solar::extraterrestrial_daily(&site, day).unwrap();
        let daily = DailyInsolation::from_global(day, r.random_range(0.0..=1.0) * h0, &site).unwrap();
        let hours = horizontal_hours(&daily, &site).unwrap();
        let hour = &hours[r.random_range(0..24)];
        let flat = Orientation::new(0.0, r.random_range(-180.0..180.0));
        let tilted = transpose(hour, &site, &flat).tilted;
        let global = hour.irradiance.global;
        let rel = if global > 0.0 { (tilted - global).abs() / global } else { tilted.abs() };
        worst = worst.max(rel);
        checked += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= TRANSPOSITION_REL_TOL && elapsed < TRANSPOSITION_BUDGET,
        format!("{checked} tuples, worst relative error {worst:.2e}, {elapsed:.2?}"),
    )
}

fn profile_normalization() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for ws in PROFILE_SUNSET_ANGLES {
        let mids = (0..24).map(|h| 15.0 * (h as f64 + 0.5 - 12.0));
        let rt: f64 = mids.clone().map(|w| hourly_global_ratio(w, ws)).sum();
        let rd: f64 = mids.map(|w| hourly_diffuse_ratio(w, ws)).sum();
        pass &= (rt - 1.0).abs() <= GLOBAL_PROFILE_TOL && (rd - 1.0).abs() <= DIFFUSE_PROFILE_TOL;
        details.push(format!("ωs={ws}: Σrt={rt:.4} Σrd={rd:.4}"));
    }
    outcome(pass, details.join("; "))
}

fn reduction_identity() -> Outcome {
    let mut r = rng(12);
    let mut worst: f64 = 0.0;
    for _ in 0..REDUCTION_CASES {
        let site = random_site(&mut r);
        let instant = SolarInstant::new(r.random_range(1..=365), r.random_range(-180.0..180.0)).unwrap();
        let flat = Orientation::new(0.0, r.random_range(-180.0..180.0));
        let diff = (solar::cos_incidence(&site, &instant, &flat) - solar::cos_zenith(&site, &instant)).abs();
        worst = worst.max(diff);
    }
    outcome(worst <= REDUCTION_TOL, format!("{REDUCTION_CASES} tuples, worst |Δcos| {worst:.2e}"))
}

fn pv_model() -> Outcome {
    let mut r = rng(13);
    let panel = PanelSpec::default();
    let mut linear = true;
    let mut monotone = true;
    let mut worst_slope = f64::NEG_INFINITY;
    for i in 0..PV_POINTS {
        let irr = HourlyIrradiance {
            tilted: r.random_range(0.0..1.2),
            ..Default::default()
        };
        let ta = r.random_range(-10.0..45.0);
        let z = r.random_range(0..500u32);
        let opts = PvModelOptions {
            temp_reference: if i % 2 == 0 { TempReference::Ambient } else { TempReference::Stc25 },
            ..Default::default()
        };
        let cfg = |z| ArrayConfig::new(30.0, 0.0, z);
        let one = hourly_energy(&irr, ta, &panel, &cfg(z), &opts);
        let two = hourly_energy(&irr, ta, &panel, &cfg(2 * z), &opts);
        linear &= two == 2.0 * one;
        let h = 1e-3;
        let slope = (hourly_energy(&irr, ta + h, &panel, &cfg(z), &opts) - hourly_energy(&irr, ta - h, &panel, &cfg(z), &opts)) / (2.0 * h);
        monotone &= slope <= 0.0;
        worst_slope = worst_slope.max(slope);
    }
    outcome(
        linear && monotone,
        format!("linearity exact: {linear}; max ∂E/∂Ta = {worst_slope:.3e} over {PV_POINTS} points"),
    )
}

fn random_windows(r: &mut ChaCha8Rng) -> Vec<RateWindow> {
    let mut windows = Vec::new();
    for days in [DaySet::Weekday, DaySet::Weekend] {
        let n = r.random_range(1..=4);
        let mut cuts: Vec<u32> = (0..n).map(|_| r.random_range(0..24)).collect();
        cuts.sort();
        cuts.dedup();
        for (i, &start) in cuts.iter().enumerate() {
            let end = match cuts[(i + 1) % cuts.len()] {
                0 => 24,
                e => e,
            };
            windows.push(RateWindow {
                days,
                start_hour: start,
                end_hour: if cuts.len() == 1 { start } else { end },
                price_per_kwh: r.random_range(0.05..0.6),
            });
        }
    }
    // a single cut means the whole day
    for w in windows.iter_mut().filter(|w| w.start_hour == w.end_hour) {
        w.start_hour = 0;
        w.end_hour = 24;
    }
    windows
}

fn billing_equivalence() -> Outcome {
    let mut r = rng(14);
    let mut exact = 0;
    for i in 0..BILLING_FIXTURES {
        let plan = TariffPlan {
            id: format!("p{i}"),
            retailer: "fixture".into(),
            kind: TariffKind::Tou,
            supply_charge_per_day: r.random_range(0.0..1.5),
            feed_in_per_kwh: r.random_range(0.0..0.2),
            rates: random_windows(&mut r),
            feed_in_rates: None,
        };
        plan.validate().expect("fixture plan partitions the week");
        let days: Vec<DayKind> = (0..r.random_range(1..=92))
            .map(|_| if r.random_bool(2.0 / 7.0) { DayKind::Weekend } else { DayKind::Weekday })
            .collect();
        let load: Vec<f64> = (0..days.len() * 24).map(|_| r.random_range(0.0..3.0)).collect();
        let balances: Vec<EnergyBalance> = load.iter().enumerate().map(|(h, &l)| EnergyBalance::new(h, l, 0.0)).collect();
        let base = base_period_cost(&plan, &load, &days).unwrap();
        let pv = pv_period_cost(&plan, &balances, &days).unwrap();
        if base == pv {
            exact += 1;
        }
    }
    outcome(exact == BILLING_FIXTURES, format!("{exact}/{BILLING_FIXTURES} fixtures bit-identical"))
}

/// Independent term-by-term evaluation of the cash-flow metrics.
struct Oracle {
    npv: f64,
    mirr_annual: f64,
    payback_years: f64,
}

fn oracle(savings: &[f64], cost: f64, a: &EconomicAssumptions) -> Oracle {
    let rd = (1.0 + a.discount_rate_annual).powf(0.25) - 1.0;
    let ri = (1.0 + a.inflation_rate_annual).powf(0.25) - 1.0;
    let q_total = savings.len();
    let mut npv = -cost;
    let mut fv_pos = 0.0;
    let mut pv_neg = cost;
    for (i, s) in savings.iter().enumerate() {
        let q = (i + 1) as i32;
        let nominal = s * (1.0 + ri).powi(q);
        npv += nominal / (1.0 + rd).powi(q);
        if nominal > 0.0 {
            fv_pos += nominal * (1.0 + rd).powi(q_total as i32 - q);
        } else {
            pv_neg -= nominal / (1.0 + rd).powi(q);
        }
    }
    let mirr_q = (fv_pos / pv_neg).powf(1.0 / q_total as f64) - 1.0;
    let mut cumulative = 0.0;
    let mut payback_years = f64::NAN;
    for (i, s) in savings.iter().enumerate() {
        let nominal = s * (1.0 + ri).powi(i as i32 + 1);
        if cumulative + nominal >= cost && nominal > 0.0 {
            payback_years = (i as f64 + (cost - cumulative) / nominal) / 4.0;
            break;
        }
        cumulative += nominal;
    }
    Oracle {
        npv,
        mirr_annual: (1.0 + mirr_q).powi(4) - 1.0,
        payback_years,
    }
}

fn economics_oracle() -> Outcome {
    let a = EconomicAssumptions::default();
    let pattern = |p: [f64; 4]| p.iter().copied().cycle().take(60).collect::<Vec<_>>();
    // (savings, cost, frozen NPV, frozen annual MIRR, frozen payback)
    let fixtures = [
        (vec![100.0; 60], 3000.0, 1537.0803251230836, 0.08963960346494604, 6.976510634335342),
        (pattern([120.0, 60.0, 40.0, 90.0]), 2500.0, 1022.2940532860935, 0.0845050333735673, 7.358281447736704),
        (pattern([-20.0, 30.0, 80.0, 50.0]), 900.0, 673.7564448604046, 0.09356479337488088, 6.42864387202642),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (i, (savings, cost, npv_frozen, mirr_frozen, payback_frozen)) in fixtures.into_iter().enumerate() {
        let got = CashFlowResult::compute(savings.clone(), &a, cost, 0.0).unwrap();
        let o = oracle(&savings, cost, &a);
        let mirr = got.mirr_annual.unwrap_or(f64::NAN);
        let payback = got.payback_years.unwrap_or(f64::NAN);
        let ok = (got.npv - o.npv).abs() <= NPV_TOL
            && (got.npv - npv_frozen).abs() <= NPV_TOL
            && (mirr - o.mirr_annual).abs() <= MIRR_TOL
            && (mirr - mirr_frozen).abs() <= MIRR_TOL
            && (payback - o.payback_years).abs() <= PAYBACK_TOL
            && (payback - payback_frozen).abs() <= PAYBACK_TOL;
        pass &= ok;
        details.push(format!("#{} NPV {:.2} MIRR {:.4}% payback {:.2}y", i + 1, got.npv, 100.0 * mirr, payback));
    }
    let spec_payback = economics::payback_period(&[100.0; 60], 1000.0, a.inflation_quarterly()).unwrap_or(f64::NAN);
    pass &= (spec_payback - 2.4340791663591927).abs() <= PAYBACK_TOL;
    details.push(format!("S=1000/100 per quarter payback {spec_payback:.3}y"));
    outcome(pass, details.join("; "))
}

fn pso_sphere() -> Outcome {
    let box30 = ConstraintSet::with_max_panels(30);
    let sphere = |x: &Point| x.iter().map(|v| v * v).sum::<f64>();
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for seed in 1..=SPHERE_RUNS {
        let cfg = SwarmConfig {
            seed,
            discretization: Discretization::Continuous,
            ..Default::default()
        };
        let r = pso::optimize(sphere, &box30, &cfg).unwrap();
        worst = worst.max(r.unsnapped_score);
        if r.unsnapped_score < SPHERE_TARGET && r.iterations <= cfg.max_iterations {
            hits += 1;
        }
    }
    outcome(
        hits >= SPHERE_PASSES,
        format!("{hits}/{SPHERE_RUNS} runs below {SPHERE_TARGET:e} (worst {worst:.2e})"),
    )
}

fn pso_integer_toy() -> Outcome {
    let box30 = ConstraintSet::with_max_panels(30);
    let toy = |x: &Point| (x[2] - 7.3).powi(2);
    let hits = (1..=TOY_RUNS)
        .filter(|&seed| {
            let cfg = SwarmConfig {
                seed,
                ..Default::default()
            };
            pso::optimize(toy, &box30, &cfg).unwrap().position[2] == 7.0
        })
        .count();
    outcome(hits as u64 == TOY_RUNS, format!("Z = 7 in {hits}/{TOY_RUNS} runs"))
}

fn fixture_scenario() -> Scenario {
    let site = SiteSpec::sydney();
    Scenario::new(ScenarioInputs {
        site,
        panel: PanelSpec::default(),
        rebate: RebateScheme::default(),
        economics: EconomicAssumptions::default(),
        model: ModelConfig::default(),
        load: synthetic::repeat_week(&synthetic::week_load()),
        day_kinds: synthetic::year_day_kinds(),
        weather: vec![synthetic::weather_year(&site).unwrap()],
        plans: synthetic::plans(),
    })
    .unwrap()
}

fn grid(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

/// Exhaustive search; returns (tilt, azimuth, panels, npv).
fn grid_oracle(s: &Scenario, plan: usize) -> (f64, f64, u32, f64) {
    let mut best = (0.0, 0.0, 0, f64::NEG_INFINITY);
    for tilt in grid(0, 90, 5) {
        for azimuth in grid(-180, 180, 5) {
            for (z, v) in s.sweep_size(plan, tilt, azimuth, 0..=30) {
                if v > best.3 {
                    best = (tilt, azimuth, z, v);
                }
            }
        }
    }
    best
}

fn end_to_end(s: &Scenario, oracles: &[(f64, f64, u32, f64)]) -> Outcome {
    let start = Instant::now();
    let constraints = ConstraintSet::with_max_panels(30);
    let mut pass = true;
    let mut details = Vec::new();
    for (plan, o) in oracles.iter().enumerate() {
        let mut hits = 0;
        let mut worst = f64::INFINITY;
        for seed in 1..=E2E_SEEDS {
            let cfg = SwarmConfig {
                seed,
                ..Default::default()
            };
            let found = s.optimize_plan(plan, &constraints, &cfg).unwrap();
            let ratio = found.npv / o.3;
            worst = worst.min(ratio);
            if ratio >= E2E_FRACTION {
                hits += 1;
            }
        }
        pass &= hits >= E2E_PASSES;
        details.push(format!(
            "{}: oracle {:.2} at ({}, {}, {}), {hits}/{E2E_SEEDS} seeds ≥ {:.1}% (worst {:.4})",
            s.plans[plan].id,
            o.3,
            o.0,
            o.1,
            o.2,
            100.0 * E2E_FRACTION,
            worst
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < E2E_BUDGET;
    details.push(format!("{elapsed:.1?} for PSO runs"));
    outcome(pass, details.join("; "))
}

fn size_curve_shape(s: &Scenario, plan: usize, o: &(f64, f64, u32, f64)) -> Outcome {
    let curve: Vec<f64> = s.sweep_size(plan, o.0, o.1, 0..=30).into_iter().map(|(_, v)| v).collect();
    let z_opt = (0..curve.len()).max_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap();
    let rises = curve[..=z_opt].windows(2).all(|w| w[1] > w[0]);
    let end = z_opt + 5;
    let declines = end < curve.len() && curve[z_opt..=end].windows(2).all(|w| w[1] < w[0]);
    outcome(
        rises && declines,
        format!(
            "{}: Z_opt {z_opt}, NPV {:.2} → {:.2} at Z_opt+5; rising {rises}, declining {declines}",
            s.plans[plan].id,
            curve[z_opt],
            curve.get(end).copied().unwrap_or(f64::NAN)
        ),
    )
}

fn orientation_band(s: &Scenario, plan: usize, o: &(f64, f64, u32, f64)) -> Outcome {
    let cells = s.sweep_orientation(plan, o.2, &grid(0, 90, 5), &grid(-180, 180, 5));
    let max = cells.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let band: Vec<&(f64, f64, f64)> = cells.iter().filter(|c| (10.0..=40.0).contains(&c.0) && c.1 == 0.0).collect();
    let worst = band.iter().map(|c| c.2 / max).fold(f64::INFINITY, f64::min);
    outcome(
        worst >= 1.0 - FIG3_BAND,
        format!(
            "{}: Z {} max NPV {:.2}; tilt 10–40 at azimuth 0 ≥ {:.2}% of max",
            s.plans[plan].id,
            o.2,
            max,
            100.0 * worst
        ),
    )
}

fn determinism(s: &Scenario) -> Outcome {
    let constraints = ConstraintSet::with_max_panels(30);
    let cfg = SwarmConfig::default();
    let render = || {
        let optima = s.optimize_all(&constraints, &cfg).unwrap();
        let rows = report::plan_results(s, &optima, &constraints).unwrap();
        let best = &optima[0];
        [
            report::plan_table_csv(&rows),
            report::convergence_csv(s, &optima),
            report::sweep_size_csv(&s.sweep_size(0, best.tilt_deg, best.azimuth_deg, 0..=30), 250.0),
            report::sweep_orientation_csv(&s.sweep_orientation(0, best.panels, &grid(0, 90, 10), &grid(-180, 180, 20))),
        ]
    };
    let a = render();
    let b = render();
    let same = a.iter().zip(&b).all(|(x, y)| x.as_bytes() == y.as_bytes());
    outcome(same, format!("{} CSV documents compared byte-for-byte", a.len()))
}

fn main() {
    let mut lines = vec![
        Line::Criterion("transposition identity (β = 0)", transposition_identity()),
        Line::Criterion("hourly profile normalization", profile_normalization()),
        Line::Criterion("incidence reduces to zenith at β = 0", reduction_identity()),
        Line::Criterion("PV linearity and temperature monotonicity", pv_model()),
        Line::Criterion("billing equivalence with zero PV", billing_equivalence()),
        Line::Criterion("economics oracle", economics_oracle()),
        Line::Criterion("PSO sphere benchmark", pso_sphere()),
        Line::Criterion("PSO integer toy", pso_integer_toy()),
    ];

    let s = fixture_scenario();
    let started = Instant::now();
    let oracles: Vec<_> = (0..s.plans.len()).map(|p| grid_oracle(&s, p)).collect();
    let oracle_time = started.elapsed();
    let mut e2e = end_to_end(&s, &oracles);
    e2e.detail.push_str(&format!(", {oracle_time:.1?} for grid oracle"));
    e2e.pass &= started.elapsed() < E2E_BUDGET;
    lines.push(Line::Criterion("end-to-end oracle equivalence", e2e));
    // Shape checks use the flat plan: its optimum is interior in Z. The TOU plan's
    // afternoon peak pulls its optimum west, so its north-facing band is reported only.
    let flat = s.plan_index("retailer-a-flat").unwrap();
    let tou = s.plan_index("retailer-b-tou").unwrap();
    lines.push(Line::Criterion("NPV vs size curve shape", size_curve_shape(&s, flat, &oracles[flat])));
    lines.push(Line::Criterion("NPV vs orientation band", orientation_band(&s, flat, &oracles[flat])));
    lines.push(Line::Info("NPV vs orientation band", orientation_band(&s, tou, &oracles[tou])));
    lines.push(Line::Criterion("determinism", determinism(&s)));

    let (mut scored, mut failed) = (0, 0);
    for line in &lines {
        match line {
            Line::Criterion(name, o) => {
                println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
                scored += 1;
                failed += usize::from(!o.pass);
            }
            Line::Info(name, o) => {
                println!("INFO {name}: {} ({})", o.detail, if o.pass { "within band" } else { "outside band" });
            }
        }
    }
    println!("{scored} criteria, {} passed, {failed} failed", scored - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
