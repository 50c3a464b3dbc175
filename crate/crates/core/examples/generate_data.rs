//! Writes the synthetic example data set used by `data/config.toml`.
//!
//! cargo run -p pvsizing --example generate_data -- data

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use pvsizing::ingest::day_of_year_365;
use pvsizing::solar::SiteSpec;
use pvsizing::synthetic;
use pvsizing::tariff::{DaySet, RateWindow, TariffKind, TariffPlan};

fn window(days: DaySet, start_hour: u32, end_hour: u32, price_per_kwh: f64) -> RateWindow {
    RateWindow {
        days,
        start_hour,
        end_hour,
        price_per_kwh,
    }
}

fn plans() -> Vec<TariffPlan> {
    let mut plans = synthetic::plans();
    plans.push(TariffPlan {
        id: "retailer-a-tou".into(),
        retailer: "Retailer A".into(),
        kind: TariffKind::Tou,
        supply_charge_per_day: 1.05,
        feed_in_per_kwh: 0.06,
        rates: vec![
            window(DaySet::Weekday, 15, 21, 0.48),
            window(DaySet::Weekday, 21, 15, 0.19),
            window(DaySet::Weekend, 0, 24, 0.19),
        ],
        feed_in_rates: None,
    });
    plans.push(TariffPlan {
        retailer: "Retailer B".into(),
        ..TariffPlan::flat("retailer-b-flat", 0.30, 0.85, 0.08)
    });
    plans.push(TariffPlan {
        retailer: "Retailer C".into(),
        ..TariffPlan::flat("retailer-c-flat", 0.26, 1.10, 0.07)
    });
    plans.push(TariffPlan {
        id: "retailer-c-tou".into(),
        retailer: "Retailer C".into(),
        kind: TariffKind::Tou,
        supply_charge_per_day: 1.00,
        feed_in_per_kwh: 0.05,
        rates: vec![
            window(DaySet::All, 7, 23, 0.31),
            window(DaySet::All, 23, 7, 0.15),
        ],
        feed_in_rates: Some(vec![
            window(DaySet::All, 16, 20, 0.12),
            window(DaySet::All, 20, 16, 0.05),
        ]),
    });
    plans
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(out.join("tariffs"))?;

    // half-hourly meter year starting Monday 2013-01-07, with a two-hour outage
    let start = NaiveDate::from_ymd_opt(2013, 1, 7).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let week = synthetic::week_load();
    let mut meter = String::from("timestamp,kwh\n");
    for i in 0..17520usize {
        let t = start + Duration::minutes(30 * i as i64);
        if (4000..4004).contains(&i) {
            continue;
        }
        let kwh = week[(i / 2) % 168] / 2.0;
        writeln!(meter, "{},{kwh:.4}", t.format("%Y-%m-%dT%H:%M:%S"))?;
    }
    std::fs::write(out.join("meter.csv"), meter)?;

    // five years of daily weather, each a slightly scaled copy of the synthetic year
    let site = SiteSpec::sydney();
    let base = synthetic::weather_year(&site)?;
    let mut weather = String::from("date,global_exposure_mj_per_m2,max_temp_c\n");
    for (k, year) in (2010..2015).enumerate() {
        let scale = [1.00, 0.96, 1.03, 0.98, 1.02][k];
        let mut d = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        while d < NaiveDate::from_ymd_opt(year + 1, 1, 1).unwrap() {
            if let Some(doy) = day_of_year_365(d) {
                let day = base.days[doy as usize - 1].unwrap();
                writeln!(
                    weather,
                    "{d},{:.2},{:.1}",
                    day.global_kwh_m2 * 3.6 * scale,
                    day.t_max_degc + k as f64 * 0.3
                )?;
            }
            d = d.succ_opt().unwrap();
        }
    }
    std::fs::write(out.join("weather.csv"), weather)?;

    for plan in plans() {
        plan.validate()?;
        std::fs::write(out.join("tariffs").join(format!("{}.json", plan.id)), plan.to_json() + "\n")?;
    }
    Ok(())
}
