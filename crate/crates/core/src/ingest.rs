//! Smart-meter and daily weather CSV ingestion.
//!
//! Meter data becomes exactly 8760 hourly values indexed by day of year
//! (leap days dropped); weather data becomes one 365-day record per calendar
//! year, optionally averaged into a typical year.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};
use crate::solar::{self, SiteSpec};
use crate::tariff::DayKind;

pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS: usize = 365;
const MJ_PER_KWH: f64 = 3.6;

/// Day of year in a 365-day calendar (29 February has no slot).
pub fn day_of_year_365(date: NaiveDate) -> Option<u32> {
    let leap = date.leap_year();
    match (date.month(), date.day()) {
        (2, 29) => None,
        (m, _) if leap && m > 2 => Some(date.ordinal() - 1),
        _ => Some(date.ordinal()),
    }
}

fn parse_timestamp(text: &str) -> Option<NaiveDateTime> {
    let text = text.trim();
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(text) {
        return Some(dt.naive_local());
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())
}

fn parse_date(text: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d").ok()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterReading {
    pub timestamp: NaiveDateTime,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterOptions {
    /// Longest run of missing hours that is filled rather than rejected.
    pub max_fill_hours: usize,
    pub min_coverage: f64,
}

impl Default for MeterOptions {
    fn default() -> Self {
        MeterOptions {
            max_fill_hours: 3,
            min_coverage: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapFill {
    pub start: NaiveDateTime,
    pub hours: usize,
}

/// Text summary of an ingest run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestReport {
    pub source: String,
    pub rows: usize,
    pub resolution_minutes: Option<u32>,
    pub coverage: Option<f64>,
    pub filled: Vec<GapFill>,
    pub warnings: Vec<String>,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source: {}", self.source)?;
        writeln!(f, "rows: {}", self.rows)?;
        if let Some(r) = self.resolution_minutes {
            writeln!(f, "resolution: {r} min")?;
        }
        if let Some(c) = self.coverage {
            writeln!(f, "coverage: {:.2}%", 100.0 * c)?;
        }
        writeln!(f, "gaps filled: {}", self.filled.len())?;
        for g in &self.filled {
            writeln!(
                f,
                "  {} ({} h) from same hour of adjacent week",
                g.start.format("%Y-%m-%d %H:%M"),
                g.hours
            )?;
        }
        writeln!(f, "warnings: {}", self.warnings.len())?;
        for w in &self.warnings {
            writeln!(f, "  {w}")?;
        }
        Ok(())
    }
}

/// One year of hourly load aligned to day-of-year slots.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterSeries {
    pub readings: Vec<MeterReading>,
    pub resolution_minutes: u32,
    pub coverage: f64,
    /// 8760 hourly energies, slot `(day_of_year - 1) * 24 + hour`.
    pub hourly: Vec<f64>,
    /// Weekday/weekend class of each day-of-year slot.
    pub day_kinds: Vec<DayKind>,
    pub report: IngestReport,
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn check_header(
    rdr: &mut csv::Reader<impl Read>,
    expected: &[&str],
    path: &Path,
) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            message: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

/// Parse `timestamp,kwh` rows, requiring strictly increasing timestamps.
pub fn parse_meter_csv<R: Read>(reader: R, source: &Path) -> Result<Vec<MeterReading>> {
    let mut rdr = csv_reader(reader);
    check_header(&mut rdr, &["timestamp", "kwh"], source)?;
    let mut out: Vec<MeterReading> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| Error::IngestRow {
            path: source.to_path_buf(),
            row,
            message,
        };
        let record = record.map_err(|e| err(e.to_string()))?;
        let ts = record.get(0).unwrap_or_default();
        let timestamp = parse_timestamp(ts).ok_or_else(|| err(format!("bad timestamp `{ts}`")))?;
        let kwh_text = record.get(1).unwrap_or_default();
        let energy_kwh: f64 = kwh_text
            .parse()
            .map_err(|_| err(format!("bad energy value `{kwh_text}`")))?;
        if !(energy_kwh >= 0.0) || !energy_kwh.is_finite() {
            return Err(err(format!("energy {energy_kwh} must be finite and non-negative")));
        }
        if let Some(prev) = out.last() {
            if timestamp == prev.timestamp {
                return Err(err(format!("duplicate timestamp {timestamp}")));
            }
            if timestamp < prev.timestamp {
                return Err(err(format!(
                    "timestamp {timestamp} precedes previous row {}",
                    prev.timestamp
                )));
            }
        }
        out.push(MeterReading {
            timestamp,
            energy_kwh,
        });
    }
    if out.is_empty() {
        return Err(Error::Ingest {
            path: source.to_path_buf(),
            message: "no readings".into(),
        });
    }
    Ok(out)
}

/// The 365 dates (no 29 February) starting at `start`.
fn window_dates(start: NaiveDate) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(DAYS);
    let mut d = start;
    while dates.len() < DAYS {
        if day_of_year_365(d).is_some() {
            dates.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    dates
}

/// Aggregate readings into one hourly year, filling short gaps from the same
/// hour one week earlier (or later, in the first week).
pub fn normalize_meter(readings: Vec<MeterReading>, options: &MeterOptions, source: &Path) -> Result<MeterSeries> {
    let fail = |message: String| Error::Ingest {
        path: source.to_path_buf(),
        message,
    };
    let first = readings.first().ok_or_else(|| fail("no readings".into()))?.timestamp;
    let step = readings
        .windows(2)
        .map(|w| (w[1].timestamp - w[0].timestamp).num_minutes())
        .min()
        .unwrap_or(60);
    let resolution = match step {
        30 => 30u32,
        60 => 60,
        other => return Err(fail(format!("unsupported interval of {other} minutes (need 30 or 60)"))),
    };
    let per_hour = (60 / resolution) as usize;

    let dates = window_dates(first.date());
    let position: HashMap<NaiveDate, usize> = dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();

    // indexed by position in time order, not by day of year
    let mut sum = vec![0.0; HOURS_PER_YEAR];
    let mut count = vec![0usize; HOURS_PER_YEAR];
    let mut report = IngestReport {
        source: source.display().to_string(),
        rows: readings.len(),
        resolution_minutes: Some(resolution),
        ..Default::default()
    };
    let mut outside = 0usize;
    for r in &readings {
        if r.timestamp.minute() % resolution != 0 || r.timestamp.second() != 0 {
            return Err(fail(format!("timestamp {} is not aligned to {resolution}-minute intervals", r.timestamp)));
        }
        match position.get(&r.timestamp.date()) {
            Some(&p) => {
                let slot = p * 24 + r.timestamp.hour() as usize;
                sum[slot] += r.energy_kwh;
                count[slot] += 1;
            }
            None => outside += 1,
        }
    }
    if outside > 0 {
        report.warnings.push(format!(
            "{outside} readings outside the 365-day window from {} (or on 29 Feb) ignored",
            dates[0]
        ));
    }

    let present: Vec<bool> = count.iter().map(|&c| c == per_hour).collect();
    let partial = count.iter().filter(|&&c| c > 0 && c < per_hour).count();
    if partial > 0 {
        report.warnings.push(format!("{partial} partially metered hours treated as missing"));
    }
    let coverage = present.iter().filter(|&&p| p).count() as f64 / HOURS_PER_YEAR as f64;
    report.coverage = Some(coverage);
    if coverage < options.min_coverage {
        return Err(fail(format!(
            "coverage {:.2}% below required {:.0}%\n{report}",
            100.0 * coverage,
            100.0 * options.min_coverage
        )));
    }

    let slot_time = |slot: usize| dates[slot / 24].and_hms_opt((slot % 24) as u32, 0, 0).expect("valid hour");
    let mut series: Vec<f64> = sum;
    let mut too_long = Vec::new();
    let mut slot = 0;
    while slot < HOURS_PER_YEAR {
        if present[slot] {
            slot += 1;
            continue;
        }
        let start = slot;
        while slot < HOURS_PER_YEAR && !present[slot] {
            slot += 1;
        }
        let len = slot - start;
        if len > options.max_fill_hours {
            too_long.push(format!("{} .. {} ({len} h)", slot_time(start), slot_time(slot - 1) + Duration::hours(1)));
            continue;
        }
        for s in start..slot {
            let donor = [s.checked_sub(168), Some(s + 168)]
                .into_iter()
                .flatten()
                .find(|&d| d < HOURS_PER_YEAR && present[d])
                .ok_or_else(|| fail(format!("no same-hour reading in adjacent weeks to fill {}", slot_time(s))))?;
            series[s] = series[donor];
        }
        report.filled.push(GapFill {
            start: slot_time(start),
            hours: len,
        });
    }
    if !too_long.is_empty() {
        return Err(fail(format!(
            "gaps longer than {} h cannot be filled: {}",
            options.max_fill_hours,
            too_long.join(", ")
        )));
    }

    let mut hourly = vec![0.0; HOURS_PER_YEAR];
    let mut day_kinds = vec![DayKind::Weekday; DAYS];
    for (p, date) in dates.iter().enumerate() {
        let doy = day_of_year_365(*date).expect("window skips leap days") as usize;
        hourly[(doy - 1) * 24..doy * 24].copy_from_slice(&series[p * 24..(p + 1) * 24]);
        day_kinds[doy - 1] = DayKind::from_weekday(date.weekday());
    }

    Ok(MeterSeries {
        readings,
        resolution_minutes: resolution,
        coverage,
        hourly,
        day_kinds,
        report,
    })
}

pub fn ingest_meter_csv(path: &Path, options: &MeterOptions) -> Result<MeterSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let readings = parse_meter_csv(file, path)?;
    normalize_meter(readings, options, path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherDay {
    pub day_of_year: u32,
    /// Daily global horizontal insolation, kWh/m².
    pub global_kwh_m2: f64,
    pub t_max_degc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherYear {
    /// Calendar year, or None for a synthesized typical year.
    pub year: Option<i32>,
    /// Slot `day_of_year - 1`.
    pub days: Vec<Option<WeatherDay>>,
}

impl WeatherYear {
    pub fn empty(year: Option<i32>) -> Self {
        WeatherYear {
            year,
            days: vec![None; DAYS],
        }
    }

    pub fn from_days(year: Option<i32>, days: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let days: Vec<Option<WeatherDay>> = days
            .into_iter()
            .enumerate()
            .map(|(i, (h, t))| {
                Some(WeatherDay {
                    day_of_year: i as u32 + 1,
                    global_kwh_m2: h,
                    t_max_degc: t,
                })
            })
            .collect();
        if days.len() != DAYS {
            return Err(Error::LengthMismatch {
                expected: DAYS,
                actual: days.len(),
            });
        }
        Ok(WeatherYear { year, days })
    }

    pub fn missing_days(&self) -> Vec<u32> {
        self.days
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_none())
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.days.iter().all(Option::is_some)
    }

    /// All 365 days, or an error naming the first missing day.
    pub fn complete_days(&self) -> Result<Vec<WeatherDay>> {
        self.days
            .iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    Error::input(format!(
                        "weather year {} is missing day {}",
                        self.year.map_or("typical".to_string(), |y| y.to_string()),
                        i + 1
                    ))
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherRecords {
    pub years: Vec<WeatherYear>,
    pub report: IngestReport,
}

/// Parse `date,global_exposure_mj_per_m2,max_temp_c` rows grouped by calendar year.
/// Rows with an empty insolation or temperature field count as missing days.
pub fn parse_weather_csv<R: Read>(reader: R, source: &Path) -> Result<WeatherRecords> {
    let mut rdr = csv_reader(reader);
    check_header(&mut rdr, &["date", "global_exposure_mj_per_m2", "max_temp_c"], source)?;
    let mut years: Vec<WeatherYear> = Vec::new();
    let mut report = IngestReport {
        source: source.display().to_string(),
        ..Default::default()
    };
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let err = |message: String| Error::IngestRow {
            path: source.to_path_buf(),
            row,
            message,
        };
        let record = record.map_err(|e| err(e.to_string()))?;
        report.rows += 1;
        let date_text = record.get(0).unwrap_or_default();
        let date = parse_date(date_text).ok_or_else(|| err(format!("bad date `{date_text}`")))?;
        let Some(doy) = day_of_year_365(date) else {
            report.warnings.push(format!("row {row}: {date} (leap day) dropped"));
            continue;
        };
        let field = |idx: usize, name: &str| -> Result<Option<f64>> {
            let text = record.get(idx).unwrap_or_default();
            if text.is_empty() {
                return Ok(None);
            }
            text.parse::<f64>()
                .map(Some)
                .map_err(|_| err(format!("bad {name} `{text}`")))
        };
        let mj = field(1, "insolation")?;
        let t_max = field(2, "temperature")?;
        if let Some(v) = mj {
            if !(v >= 0.0) {
                return Err(err(format!("negative insolation {v}")));
            }
        }
        let year = match years.iter_mut().find(|y| y.year == Some(date.year())) {
            Some(y) => y,
            None => {
                years.push(WeatherYear::empty(Some(date.year())));
                years.last_mut().expect("just pushed")
            }
        };
        let slot = &mut year.days[doy as usize - 1];
        if slot.is_some() {
            return Err(err(format!("duplicate date {date}")));
        }
        match (mj, t_max) {
            (Some(mj), Some(t)) => {
                *slot = Some(WeatherDay {
                    day_of_year: doy,
                    global_kwh_m2: mj / MJ_PER_KWH,
                    t_max_degc: t,
                })
            }
            _ => report.warnings.push(format!("row {row}: {date} has an empty field, treated as missing")),
        }
    }
    years.sort_by_key(|y| y.year);
    for y in &years {
        let missing = y.missing_days();
        if !missing.is_empty() {
            report.warnings.push(format!(
                "year {}: {} missing day(s): {}",
                y.year.unwrap_or_default(),
                missing.len(),
                summarize_days(&missing)
            ));
        }
    }
    if years.is_empty() {
        return Err(Error::Ingest {
            path: source.to_path_buf(),
            message: "no weather rows".into(),
        });
    }
    Ok(WeatherRecords { years, report })
}

fn summarize_days(days: &[u32]) -> String {
    let shown: Vec<String> = days.iter().take(10).map(u32::to_string).collect();
    if days.len() > 10 {
        format!("{} ...", shown.join(", "))
    } else {
        shown.join(", ")
    }
}

pub fn ingest_weather_csv(path: &Path) -> Result<WeatherRecords> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    parse_weather_csv(file, path)
}

/// Per-day-of-year mean of insolation and maximum temperature across years.
pub fn typical_weather_year(years: &[WeatherYear]) -> Result<WeatherYear> {
    if years.is_empty() {
        return Err(Error::input("no weather years to average"));
    }
    let mut out = WeatherYear::empty(None);
    for (i, slot) in out.days.iter_mut().enumerate() {
        let present: Vec<&WeatherDay> = years.iter().filter_map(|y| y.days[i].as_ref()).collect();
        if present.is_empty() {
            return Err(Error::input(format!("day of year {} is missing in every weather year", i + 1)));
        }
        let n = present.len() as f64;
        *slot = Some(WeatherDay {
            day_of_year: i as u32 + 1,
            global_kwh_m2: present.iter().map(|d| d.global_kwh_m2).sum::<f64>() / n,
            t_max_degc: present.iter().map(|d| d.t_max_degc).sum::<f64>() / n,
        });
    }
    Ok(out)
}

/// Days whose insolation exceeds 1.05 times the extraterrestrial total.
pub fn validate_weather(year: &WeatherYear, site: &SiteSpec) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    for d in year.days.iter().flatten() {
        let h0 = solar::extraterrestrial_daily(site, d.day_of_year)?;
        if d.global_kwh_m2 > 1.05 * h0 {
            warnings.push(format!(
                "day {}: insolation {:.2} kWh/m² exceeds 1.05 x extraterrestrial {:.2}",
                d.day_of_year, d.global_kwh_m2, h0
            ));
        }
    }
    Ok(warnings)
}

/// Resolve `path` relative to `base` unless it is absolute.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
