//! Small synthetic household: a repeating week of load and weather and two
//! retail plans. Used by tests, benchmarks and the example data set.

use crate::error::Result;
use crate::ingest::{WeatherYear, DAYS, HOURS_PER_YEAR};
use crate::solar::{extraterrestrial_daily, SiteSpec};
use crate::tariff::{DayKind, DaySet, RateWindow, TariffKind, TariffPlan};

/// Clearness index of each day of the synthetic week.
pub const WEEK_CLEARNESS: [f64; 7] = [0.62, 0.58, 0.35, 0.66, 0.52, 0.64, 0.48];

/// Hourly household load for one week (Monday first), kWh.
pub fn week_load() -> Vec<f64> {
    const WEEKDAY: [f64; 24] = [
        0.35, 0.30, 0.28, 0.28, 0.30, 0.40, 0.75, 1.10, 0.90, 0.55, 0.45, 0.45, 0.50, 0.45, 0.45,
        0.55, 0.85, 1.30, 1.60, 1.50, 1.25, 0.95, 0.65, 0.45,
    ];
    const WEEKEND: [f64; 24] = [
        0.40, 0.32, 0.30, 0.28, 0.28, 0.32, 0.45, 0.70, 1.00, 1.05, 0.95, 0.90, 0.95, 0.85, 0.80,
        0.85, 1.00, 1.35, 1.55, 1.45, 1.20, 0.95, 0.70, 0.50,
    ];
    (0..7)
        .flat_map(|d| if d < 5 { WEEKDAY } else { WEEKEND })
        .collect()
}

/// Day classes for a year that starts on a Monday.
pub fn year_day_kinds() -> Vec<DayKind> {
    (0..DAYS)
        .map(|d| if d % 7 < 5 { DayKind::Weekday } else { DayKind::Weekend })
        .collect()
}

/// A week of hourly values tiled across 8760 hours.
pub fn repeat_week(week: &[f64]) -> Vec<f64> {
    week.iter().copied().cycle().take(HOURS_PER_YEAR).collect()
}

/// Daily insolation following the week's clearness pattern and a seasonal
/// maximum temperature peaking in mid-January.
pub fn weather_year(site: &SiteSpec) -> Result<WeatherYear> {
    let days = (1..=DAYS as u32)
        .map(|d| {
            let h = WEEK_CLEARNESS[(d as usize - 1) % 7] * extraterrestrial_daily(site, d)?;
            let t = 22.0 + 6.0 * (2.0 * std::f64::consts::PI * (d as f64 - 15.0) / 365.0).cos();
            Ok((h, t))
        })
        .collect::<Result<Vec<_>>>()?;
    WeatherYear::from_days(None, days)
}

/// Flat plan with a low export credit.
pub fn flat_plan() -> TariffPlan {
    TariffPlan {
        id: "retailer-a-flat".into(),
        retailer: "Retailer A".into(),
        ..TariffPlan::flat("retailer-a-flat", 0.28, 1.00, 0.06)
    }
}

/// Weekday peak/shoulder/off-peak plan, shoulder/off-peak on weekends.
pub fn tou_plan() -> TariffPlan {
    let w = |days, start_hour, end_hour, price_per_kwh| RateWindow {
        days,
        start_hour,
        end_hour,
        price_per_kwh,
    };
    TariffPlan {
        id: "retailer-b-tou".into(),
        retailer: "Retailer B".into(),
        kind: TariffKind::Tou,
        supply_charge_per_day: 0.95,
        feed_in_per_kwh: 0.08,
        rates: vec![
            w(DaySet::Weekday, 14, 20, 0.45),
            w(DaySet::Weekday, 7, 14, 0.24),
            w(DaySet::Weekday, 20, 22, 0.24),
            w(DaySet::Weekday, 22, 7, 0.13),
            w(DaySet::Weekend, 7, 22, 0.24),
            w(DaySet::Weekend, 22, 7, 0.13),
        ],
        feed_in_rates: None,
    }
}

pub fn plans() -> Vec<TariffPlan> {
    vec![flat_plan(), tou_plan()]
}
