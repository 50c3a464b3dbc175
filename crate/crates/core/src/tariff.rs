//! Retail electricity plans, billing-period costs and rebated system cost.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pv::PanelSpec;

/// Days in each billing quarter of the 365-day simulation year.
pub const BILLING_QUARTER_DAYS: [usize; 4] = [91, 91, 91, 92];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayKind {
    Weekday,
    Weekend,
}

impl DayKind {
    pub fn from_weekday(day: chrono::Weekday) -> Self {
        match day {
            chrono::Weekday::Sat | chrono::Weekday::Sun => DayKind::Weekend,
            _ => DayKind::Weekday,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DaySet {
    All,
    Weekday,
    Weekend,
}

impl DaySet {
    pub fn contains(self, kind: DayKind) -> bool {
        matches!(
            (self, kind),
            (DaySet::All, _)
                | (DaySet::Weekday, DayKind::Weekday)
                | (DaySet::Weekend, DayKind::Weekend)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TariffKind {
    Flat,
    Tou,
}

impl fmt::Display for TariffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TariffKind::Flat => "Flat",
            TariffKind::Tou => "TOU",
        })
    }
}

/// Price applying on `days` from `start_hour` (inclusive) to `end_hour`
/// (exclusive). A start after the end wraps past midnight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateWindow {
    pub days: DaySet,
    pub start_hour: u32,
    pub end_hour: u32,
    pub price_per_kwh: f64,
}

impl RateWindow {
    pub fn all_day(price_per_kwh: f64) -> Self {
        RateWindow {
            days: DaySet::All,
            start_hour: 0,
            end_hour: 24,
            price_per_kwh,
        }
    }

    pub fn covers(&self, kind: DayKind, hour: u32) -> bool {
        if !self.days.contains(kind) {
            return false;
        }
        if self.start_hour < self.end_hour {
            (self.start_hour..self.end_hour).contains(&hour)
        } else {
            hour >= self.start_hour || hour < self.end_hour
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.start_hour > 23 {
            return Err(format!("start_hour {} outside 0..=23", self.start_hour));
        }
        if !(1..=24).contains(&self.end_hour) {
            return Err(format!("end_hour {} outside 1..=24", self.end_hour));
        }
        if self.start_hour == self.end_hour {
            return Err(format!(
                "empty window {}..{}",
                self.start_hour, self.end_hour
            ));
        }
        if !(self.price_per_kwh >= 0.0) {
            return Err(format!("negative price {}", self.price_per_kwh));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffPlan {
    pub id: String,
    pub retailer: String,
    pub kind: TariffKind,
    pub supply_charge_per_day: f64,
    pub feed_in_per_kwh: f64,
    pub rates: Vec<RateWindow>,
    /// Optional hour-dependent feed-in schedule; overrides `feed_in_per_kwh`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_in_rates: Option<Vec<RateWindow>>,
}

const WEEK: [(chrono::Weekday, DayKind); 7] = {
    use chrono::Weekday::*;
    [
        (Mon, DayKind::Weekday),
        (Tue, DayKind::Weekday),
        (Wed, DayKind::Weekday),
        (Thu, DayKind::Weekday),
        (Fri, DayKind::Weekday),
        (Sat, DayKind::Weekend),
        (Sun, DayKind::Weekend),
    ]
};

fn check_partition(windows: &[RateWindow]) -> std::result::Result<(), String> {
    for w in windows {
        w.check()?;
    }
    for (weekday, kind) in WEEK {
        for hour in 0..24 {
            let n = windows.iter().filter(|w| w.covers(kind, hour)).count();
            match n {
                1 => {}
                0 => return Err(format!("week-hour {weekday} {hour:02}:00 is not covered by any rate")),
                _ => {
                    return Err(format!(
                        "week-hour {weekday} {hour:02}:00 is covered by {n} overlapping rates"
                    ))
                }
            }
        }
    }
    Ok(())
}

impl TariffPlan {
    pub fn flat(id: &str, price: f64, supply: f64, feed_in: f64) -> Self {
        TariffPlan {
            id: id.to_string(),
            retailer: id.to_string(),
            kind: TariffKind::Flat,
            supply_charge_per_day: supply,
            feed_in_per_kwh: feed_in,
            rates: vec![RateWindow::all_day(price)],
            feed_in_rates: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let plan: TariffPlan = serde_json::from_str(text).map_err(|e| Error::Tariff {
            plan: "<unparsed>".to_string(),
            message: e.to_string(),
        })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading tariff {}", path.display()), e))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Tariff { plan, message } => Error::Tariff {
                plan,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tariff serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Tariff {
                plan: self.id.clone(),
                message,
            })
        };
        if self.id.trim().is_empty() {
            return fail("empty id".to_string());
        }
        if !(self.supply_charge_per_day >= 0.0) || !(self.feed_in_per_kwh >= 0.0) {
            return fail("supply charge and feed-in rate must be non-negative".to_string());
        }
        if self.kind == TariffKind::Flat {
            let whole = self.rates.len() == 1
                && self.rates[0].days == DaySet::All
                && self.rates[0].start_hour == 0
                && self.rates[0].end_hour == 24;
            if !whole {
                return fail(
                    "flat plan needs exactly one rate with days \"all\", 0..24".to_string(),
                );
            }
        }
        if let Err(msg) = check_partition(&self.rates) {
            return fail(msg);
        }
        if let Some(feed) = &self.feed_in_rates {
            if let Err(msg) = check_partition(feed) {
                return fail(format!("feed-in schedule: {msg}"));
            }
        }
        Ok(())
    }

    pub fn import_rate(&self, kind: DayKind, hour: u32) -> f64 {
        self.rates
            .iter()
            .find(|w| w.covers(kind, hour))
            .map_or(0.0, |w| w.price_per_kwh)
    }

    pub fn feed_in_rate(&self, kind: DayKind, hour: u32) -> f64 {
        match &self.feed_in_rates {
            Some(windows) => windows
                .iter()
                .find(|w| w.covers(kind, hour))
                .map_or(0.0, |w| w.price_per_kwh),
            None => self.feed_in_per_kwh,
        }
    }

    pub fn label(&self) -> String {
        format!("{} {}", self.retailer, self.kind)
    }
}

/// Load every `*.json` plan in a directory, ordered by file name.
pub fn load_tariff_dir(dir: &Path) -> Result<Vec<TariffPlan>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Error::io(format!("reading tariff directory {}", dir.display()), e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::input(format!(
            "no tariff files (*.json) in {}",
            dir.display()
        )));
    }
    let plans = paths
        .iter()
        .map(|p| TariffPlan::load(p))
        .collect::<Result<Vec<_>>>()?;
    let mut ids: Vec<_> = plans.iter().map(|p| p.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::input(format!("duplicate tariff id `{}`", w[0])));
    }
    Ok(plans)
}

/// Import and feed-in price for every hour of a run of days.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRates {
    pub import: Vec<f64>,
    pub feed_in: Vec<f64>,
    pub supply_per_day: f64,
}

impl HourlyRates {
    pub fn new(plan: &TariffPlan, days: &[DayKind]) -> Self {
        let mut import = Vec::with_capacity(days.len() * 24);
        let mut feed_in = Vec::with_capacity(days.len() * 24);
        for &kind in days {
            for hour in 0..24 {
                import.push(plan.import_rate(kind, hour));
                feed_in.push(plan.feed_in_rate(kind, hour));
            }
        }
        HourlyRates {
            import,
            feed_in,
            supply_per_day: plan.supply_charge_per_day,
        }
    }

    pub fn days(&self) -> usize {
        self.import.len() / 24
    }

    /// Cost of a run of days without PV.
    pub fn base_cost(&self, load: &[f64]) -> f64 {
        let mut total = 0.0;
        for (rates, loads) in self.import.chunks_exact(24).zip(load.chunks_exact(24)) {
            let energy: f64 = rates.iter().zip(loads).map(|(r, e)| r * e).sum();
            total += energy + self.supply_per_day;
        }
        total
    }

    /// Cost of a run of days given the net balance per hour (positive = import).
    pub fn net_cost(&self, balance: impl Iterator<Item = f64>) -> f64 {
        let mut total = 0.0;
        let mut day = 0.0;
        for (i, ((bal, import), feed)) in balance
            .zip(&self.import)
            .zip(&self.feed_in)
            .enumerate()
        {
            day += import * bal.max(0.0) - feed * (-bal).max(0.0);
            if i % 24 == 23 {
                total += self.supply_per_day + day;
                day = 0.0;
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub hour_index: usize,
    pub e_load: f64,
    pub e_pv: f64,
    pub e_bal: f64,
}

impl EnergyBalance {
    pub fn new(hour_index: usize, e_load: f64, e_pv: f64) -> Self {
        EnergyBalance {
            hour_index,
            e_load,
            e_pv,
            e_bal: e_load - e_pv,
        }
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// Cost over `days.len()` days without PV.
pub fn base_period_cost(plan: &TariffPlan, load: &[f64], days: &[DayKind]) -> Result<f64> {
    check_len(days.len() * 24, load.len())?;
    Ok(HourlyRates::new(plan, days).base_cost(load))
}

/// Cost over `days.len()` days with PV. Negative when exports outweigh charges.
pub fn pv_period_cost(plan: &TariffPlan, balances: &[EnergyBalance], days: &[DayKind]) -> Result<f64> {
    check_len(days.len() * 24, balances.len())?;
    Ok(HourlyRates::new(plan, days).net_cost(balances.iter().map(|b| b.e_bal)))
}

/// Plan with the lowest no-PV cost over the given load; ties go to the smaller id.
pub fn lowest_cost_base_plan<'a>(
    plans: &'a [TariffPlan],
    load: &[f64],
    days: &[DayKind],
) -> Result<&'a TariffPlan> {
    let mut best: Option<(&TariffPlan, f64)> = None;
    for plan in plans {
        let cost = base_period_cost(plan, load, days)?;
        best = match best {
            Some((b, c)) if c < cost || (c == cost && b.id <= plan.id) => Some((b, c)),
            _ => Some((plan, cost)),
        };
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| Error::input("no tariff plans supplied"))
}

/// Small-scale technology certificate rebate and installed cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RebateScheme {
    /// Certificates per kW installed.
    pub stc_multiplier: f64,
    /// Value of one certificate.
    pub stc_price: f64,
    /// Installed cost per watt peak.
    pub unit_cost_per_wp: f64,
}

impl Default for RebateScheme {
    fn default() -> Self {
        RebateScheme {
            stc_multiplier: 20.73,
            stc_price: 35.0,
            unit_cost_per_wp: 2.30,
        }
    }
}

impl RebateScheme {
    pub fn validate(&self) -> Result<()> {
        if self.stc_multiplier >= 0.0 && self.stc_price >= 0.0 && self.unit_cost_per_wp >= 0.0 {
            Ok(())
        } else {
            Err(Error::input("rebate parameters must be non-negative"))
        }
    }
}

/// Net installed cost of `panel_count` panels after the certificate rebate.
pub fn system_cost(panel_count: u32, panel: &PanelSpec, rebate: &RebateScheme) -> f64 {
    system_cost_for_rating(panel_count as f64 * panel.rated_power_w, rebate)
}

/// Net installed cost of an array rated at `rated_w` watts.
pub fn system_cost_for_rating(rated_w: f64, rebate: &RebateScheme) -> f64 {
    let gross = rebate.unit_cost_per_wp * rated_w;
    let rebate_value = rebate.stc_multiplier * (rated_w / 1000.0) * rebate.stc_price;
    (gross - rebate_value).max(0.0)
}
