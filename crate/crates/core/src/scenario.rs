//! One household's optimization problem: load, weather, plans and economics,
//! with the NPV of any (plan, tilt, azimuth, panel count).

use rayon::prelude::*;

use crate::config::{ModelConfig, RunConfig, WeatherMode};
use crate::economics::{npv, CashFlowResult, EconomicAssumptions};
use crate::error::{Error, Result};
use crate::ingest::{self, IngestReport, MeterSeries, WeatherYear, DAYS, HOURS_PER_YEAR};
use crate::insolation::{horizontal_hours, tilted_plane_with, DailyInsolation, HourlyIrradiance, TiltTerms};
use crate::pso::{self, ConstraintSet, OptimizeResult, Point, SwarmConfig};
use crate::pv::{panel_hourly_energy, PanelSpec};
use crate::solar::{beam_ratio, IncidenceCoefficients, Orientation, OrientationTrig, SiteSpec};
use crate::tariff::{
    lowest_cost_base_plan, system_cost_for_rating, DayKind, HourlyRates, RebateScheme, TariffPlan,
    BILLING_QUARTER_DAYS,
};

/// Hour ranges of the four billing quarters within a 365-day year.
pub fn quarter_hours() -> [std::ops::Range<usize>; 4] {
    let mut start = 0;
    BILLING_QUARTER_DAYS.map(|days| {
        let r = start * 24..(start + days) * 24;
        start += days;
        r
    })
}

#[derive(Debug, Clone, Copy)]
struct SunlitHour {
    index: usize,
    cos_zenith: f64,
    incidence: IncidenceCoefficients,
    irradiance: HourlyIrradiance,
    t_ambient: f64,
}

/// Sunlit hours of one weather year with orientation-independent terms cached.
#[derive(Debug, Clone)]
struct YearModel {
    hours: Vec<SunlitHour>,
}

impl YearModel {
    fn new(year: &WeatherYear, site: &SiteSpec) -> Result<Self> {
        let mut hours = Vec::new();
        for day in year.complete_days()? {
            let daily = DailyInsolation::from_global(day.day_of_year, day.global_kwh_m2, site)?;
            for h in horizontal_hours(&daily, site)? {
                if h.irradiance.global > 0.0 {
                    hours.push(SunlitHour {
                        index: (day.day_of_year as usize - 1) * 24 + h.irradiance.hour_index,
                        cos_zenith: h.cos_zenith,
                        incidence: IncidenceCoefficients::new(site, &h.instant),
                        irradiance: h.irradiance,
                        // daily maximum stands in for daytime ambient
                        t_ambient: day.t_max_degc,
                    });
                }
            }
        }
        Ok(YearModel { hours })
    }
}

/// Everything needed to build a [`Scenario`].
#[derive(Debug, Clone)]
pub struct ScenarioInputs {
    pub site: SiteSpec,
    pub panel: PanelSpec,
    pub rebate: RebateScheme,
    pub economics: EconomicAssumptions,
    pub model: ModelConfig,
    /// 8760 hourly loads by day-of-year slot.
    pub load: Vec<f64>,
    pub day_kinds: Vec<DayKind>,
    /// Complete years to simulate; savings are averaged across them.
    pub weather: Vec<WeatherYear>,
    pub plans: Vec<TariffPlan>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub site: SiteSpec,
    pub panel: PanelSpec,
    pub rebate: RebateScheme,
    pub economics: EconomicAssumptions,
    pub model: ModelConfig,
    pub load: Vec<f64>,
    pub day_kinds: Vec<DayKind>,
    pub plans: Vec<TariffPlan>,
    /// Index of the plan with the lowest no-PV annual cost.
    pub base_plan: usize,
    years: Vec<YearModel>,
    rates: Vec<[HourlyRates; 4]>,
    base_quarter_cost: [f64; 4],
}

/// Best configuration found for one plan.
#[derive(Debug, Clone)]
pub struct PlanOptimum {
    pub plan: usize,
    pub tilt_deg: f64,
    pub azimuth_deg: f64,
    pub panels: u32,
    pub npv: f64,
    pub run: OptimizeResult,
}

impl Scenario {
    pub fn new(inputs: ScenarioInputs) -> Result<Self> {
        inputs.site.validate()?;
        inputs.panel.validate()?;
        inputs.rebate.validate()?;
        inputs.economics.validate()?;
        if inputs.load.len() != HOURS_PER_YEAR {
            return Err(Error::LengthMismatch {
                expected: HOURS_PER_YEAR,
                actual: inputs.load.len(),
            });
        }
        if inputs.day_kinds.len() != DAYS {
            return Err(Error::LengthMismatch {
                expected: DAYS,
                actual: inputs.day_kinds.len(),
            });
        }
        if inputs.weather.is_empty() {
            return Err(Error::input("no weather year supplied"));
        }
        for plan in &inputs.plans {
            plan.validate()?;
        }
        let base = lowest_cost_base_plan(&inputs.plans, &inputs.load, &inputs.day_kinds)?;
        let base_plan = inputs.plans.iter().position(|p| p.id == base.id).expect("plan from list");

        let quarters = quarter_hours();
        let rates: Vec<[HourlyRates; 4]> = inputs
            .plans
            .iter()
            .map(|plan| quarters.clone().map(|r| HourlyRates::new(plan, &inputs.day_kinds[r.start / 24..r.end / 24])))
            .collect();
        let base_quarter_cost: [f64; 4] =
            std::array::from_fn(|q| rates[base_plan][q].base_cost(&inputs.load[quarters[q].clone()]));
        let years = inputs
            .weather
            .iter()
            .map(|y| YearModel::new(y, &inputs.site))
            .collect::<Result<Vec<_>>>()?;

        Ok(Scenario {
            site: inputs.site,
            panel: inputs.panel,
            rebate: inputs.rebate,
            economics: inputs.economics,
            model: inputs.model,
            load: inputs.load,
            day_kinds: inputs.day_kinds,
            plans: inputs.plans,
            base_plan,
            years,
            rates,
            base_quarter_cost,
        })
    }

    pub fn plan_index(&self, id: &str) -> Result<usize> {
        self.plans
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| Error::input(format!("unknown plan `{id}`")))
    }

    /// Hourly energy of a single panel at this orientation, one vector per weather year.
    pub fn panel_energy(&self, tilt_deg: f64, azimuth_deg: f64) -> Vec<Vec<f64>> {
        let orient = Orientation::new(tilt_deg, azimuth_deg);
        let trig = OrientationTrig::new(&orient);
        let terms = TiltTerms::new(tilt_deg);
        let rho = self.site.ground_reflectance;
        self.years
            .iter()
            .map(|year| {
                let mut e = vec![0.0; HOURS_PER_YEAR];
                for h in &year.hours {
                    let rb = if h.cos_zenith <= 0.0 {
                        0.0
                    } else if tilt_deg == 0.0 {
                        1.0
                    } else {
                        beam_ratio(h.incidence.cos_incidence(&trig), h.cos_zenith)
                    };
                    let tilted = tilted_plane_with(&h.irradiance, rb, &terms, rho);
                    e[h.index] = panel_hourly_energy(
                        tilted,
                        h.t_ambient,
                        &self.panel,
                        self.model.bop_efficiency,
                        &self.model.pv,
                    );
                }
                e
            })
            .collect()
    }

    /// Saving per billing quarter of moving from the base plan without PV to
    /// `plan` with `panels` panels, averaged over weather years.
    pub fn quarter_savings(&self, plan: usize, panel_energy: &[Vec<f64>], panels: f64) -> [f64; 4] {
        let quarters = quarter_hours();
        let mut savings = [0.0; 4];
        for e in panel_energy {
            for (q, range) in quarters.iter().enumerate() {
                let balance = self.load[range.clone()]
                    .iter()
                    .zip(&e[range.clone()])
                    .map(|(load, pv)| load - panels * pv);
                savings[q] += self.base_quarter_cost[q] - self.rates[plan][q].net_cost(balance);
            }
        }
        savings.map(|s| s / panel_energy.len() as f64)
    }

    /// The annual quarterly pattern repeated over the lifespan.
    pub fn lifetime_savings(&self, quarters: [f64; 4]) -> Vec<f64> {
        quarters.iter().copied().cycle().take(self.economics.periods()).collect()
    }

    pub fn system_cost(&self, panels: f64) -> f64 {
        system_cost_for_rating(panels * self.panel.rated_power_w, &self.rebate)
    }

    fn npv_with_energy(&self, plan: usize, energy: &[Vec<f64>], panels: f64) -> f64 {
        let savings = self.lifetime_savings(self.quarter_savings(plan, energy, panels));
        npv(&savings, &self.economics, self.system_cost(panels)).expect("series has lifespan length")
    }

    /// NPV of one configuration; panel count may be fractional.
    pub fn npv(&self, plan: usize, tilt_deg: f64, azimuth_deg: f64, panels: f64) -> f64 {
        self.npv_with_energy(plan, &self.panel_energy(tilt_deg, azimuth_deg), panels)
    }

    /// Full metric set for an explicit configuration, rejecting points outside `constraints`.
    pub fn evaluate(
        &self,
        plan: usize,
        tilt_deg: f64,
        azimuth_deg: f64,
        panels: u32,
        constraints: &ConstraintSet,
        baseline_npv: f64,
    ) -> Result<CashFlowResult> {
        check_bounds(constraints, [tilt_deg, azimuth_deg, panels as f64])?;
        if plan >= self.plans.len() {
            return Err(Error::input(format!("plan index {plan} out of range")));
        }
        let energy = self.panel_energy(tilt_deg, azimuth_deg);
        let savings = self.lifetime_savings(self.quarter_savings(plan, &energy, panels as f64));
        CashFlowResult::compute(savings, &self.economics, self.system_cost(panels as f64), baseline_npv)
    }

    /// Maximize NPV for one plan with the swarm.
    pub fn optimize_plan(&self, plan: usize, constraints: &ConstraintSet, swarm: &SwarmConfig) -> Result<PlanOptimum> {
        let run = pso::optimize(|x: &Point| -self.npv(plan, x[0], x[1], x[2]), constraints, swarm)?;
        let [tilt, azimuth, z] = run.position;
        Ok(PlanOptimum {
            plan,
            tilt_deg: tilt,
            azimuth_deg: azimuth,
            panels: z.round() as u32,
            npv: -run.score,
            run,
        })
    }

    /// Optimize every plan in parallel; results are in plan order.
    pub fn optimize_all(&self, constraints: &ConstraintSet, swarm: &SwarmConfig) -> Result<Vec<PlanOptimum>> {
        (0..self.plans.len())
            .into_par_iter()
            .map(|p| self.optimize_plan(p, constraints, swarm))
            .collect()
    }

    /// NPV for each panel count at a fixed orientation.
    pub fn sweep_size(&self, plan: usize, tilt_deg: f64, azimuth_deg: f64, panels: impl IntoIterator<Item = u32>) -> Vec<(u32, f64)> {
        let energy = self.panel_energy(tilt_deg, azimuth_deg);
        panels
            .into_iter()
            .map(|z| (z, self.npv_with_energy(plan, &energy, z as f64)))
            .collect()
    }

    /// NPV over a tilt × azimuth grid at a fixed panel count, row-major by tilt.
    pub fn sweep_orientation(&self, plan: usize, panels: u32, tilts: &[f64], azimuths: &[f64]) -> Vec<(f64, f64, f64)> {
        tilts
            .par_iter()
            .flat_map_iter(|&t| azimuths.iter().map(move |&a| (t, a, self.npv(plan, t, a, panels as f64))))
            .collect()
    }
}

fn check_bounds(constraints: &ConstraintSet, x: Point) -> Result<()> {
    if constraints.is_feasible(&x) {
        return Ok(());
    }
    let names = ["tilt", "azimuth", "panels"];
    let broken: Vec<String> = constraints
        .bounds()
        .iter()
        .zip(names)
        .zip(x)
        .filter(|((b, _), v)| b.g(*v) > 0.0)
        .map(|((b, name), _)| format!("{name} in [{}, {}]", b.lo, b.hi))
        .collect();
    Err(Error::BoundViolation {
        tilt_deg: x[0],
        azimuth_deg: x[1],
        panels: x[2],
        bound: broken.join(", "),
    })
}

/// Scenario built from files plus the text of the ingest reports.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub meter: MeterSeries,
    pub weather_report: IngestReport,
    pub weather_warnings: Vec<String>,
}

impl LoadedScenario {
    pub fn ingest_report(&self) -> String {
        let mut out = String::from("[meter]\n");
        out.push_str(&self.meter.report.to_string());
        out.push_str("\n[weather]\n");
        out.push_str(&self.weather_report.to_string());
        out.push_str(&format!("plausibility warnings: {}\n", self.weather_warnings.len()));
        for w in &self.weather_warnings {
            out.push_str(&format!("  {w}\n"));
        }
        out
    }
}

/// Ingest meter, weather and tariff files named by the configuration.
pub fn load_scenario(cfg: &RunConfig) -> Result<LoadedScenario> {
    let meter = ingest::ingest_meter_csv(&cfg.paths.meter, &cfg.meter.into())?;
    let weather = ingest::ingest_weather_csv(&cfg.paths.weather)?;
    let plans = crate::tariff::load_tariff_dir(&cfg.paths.tariffs)?;
    let mut weather_report = weather.report;
    let years = match cfg.model.weather_mode {
        WeatherMode::Typical => vec![ingest::typical_weather_year(&weather.years)?],
        WeatherMode::PerYear => {
            let (complete, partial): (Vec<_>, Vec<_>) = weather.years.into_iter().partition(WeatherYear::is_complete);
            for y in &partial {
                weather_report
                    .warnings
                    .push(format!("year {} incomplete, excluded", y.year.unwrap_or_default()));
            }
            if complete.is_empty() {
                return Err(Error::input("per-year weather mode needs at least one complete year"));
            }
            complete
        }
    };
    let mut weather_warnings = Vec::new();
    for y in &years {
        weather_warnings.extend(ingest::validate_weather(y, &cfg.site)?);
    }
    let scenario = Scenario::new(ScenarioInputs {
        site: cfg.site,
        panel: cfg.panel.clone(),
        rebate: cfg.rebate,
        economics: cfg.economics,
        model: cfg.model,
        load: meter.hourly.clone(),
        day_kinds: meter.day_kinds.clone(),
        weather: years,
        plans,
    })?;
    Ok(LoadedScenario {
        scenario,
        meter,
        weather_report,
        weather_warnings,
    })
}
