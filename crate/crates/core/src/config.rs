//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::economics::EconomicAssumptions;
use crate::error::{Error, Result};
use crate::ingest::{resolve, MeterOptions};
use crate::pso::{ConstraintSet, SwarmConfig};
use crate::pv::{PanelSpec, PvModelOptions, DEFAULT_BOP_EFFICIENCY};
use crate::solar::SiteSpec;
use crate::tariff::RebateScheme;

pub const DEFAULT_MAX_PANELS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    /// Tilt in [0, 90], panels in [0, max_panels].
    #[default]
    Given,
    /// Tilt in [0, 180], panels in [0, 2 * max_panels].
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsConfig {
    pub max_panels: u32,
    pub mode: BoundsMode,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            max_panels: DEFAULT_MAX_PANELS,
            mode: BoundsMode::Given,
        }
    }
}

impl BoundsConfig {
    pub fn constraints(&self) -> ConstraintSet {
        match self.mode {
            BoundsMode::Given => ConstraintSet::with_max_panels(self.max_panels),
            BoundsMode::Literal => ConstraintSet::literal(self.max_panels),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherMode {
    /// Simulate one day-of-year mean year.
    #[default]
    Typical,
    /// Simulate every complete year and average the quarterly savings.
    PerYear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub bop_efficiency: f64,
    pub weather_mode: WeatherMode,
    #[serde(flatten)]
    pub pv: PvModelOptions,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            bop_efficiency: DEFAULT_BOP_EFFICIENCY,
            weather_mode: WeatherMode::Typical,
            pv: PvModelOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeterConfig {
    pub max_fill_hours: usize,
    pub min_coverage: f64,
}

impl Default for MeterConfig {
    fn default() -> Self {
        let m = MeterOptions::default();
        MeterConfig {
            max_fill_hours: m.max_fill_hours,
            min_coverage: m.min_coverage,
        }
    }
}

impl From<MeterConfig> for MeterOptions {
    fn from(m: MeterConfig) -> Self {
        MeterOptions {
            max_fill_hours: m.max_fill_hours,
            min_coverage: m.min_coverage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathsConfig {
    pub meter: PathBuf,
    pub weather: PathBuf,
    /// Directory of `*.json` tariff plans.
    pub tariffs: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "SiteSpec::sydney")]
    pub site: SiteSpec,
    #[serde(default)]
    pub panel: PanelSpec,
    #[serde(default)]
    pub rebate: RebateScheme,
    #[serde(default)]
    pub economics: EconomicAssumptions,
    #[serde(default)]
    pub swarm: SwarmConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub meter: MeterConfig,
    pub paths: PathsConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read, resolve paths against the file's directory, and validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.paths = PathsConfig {
            meter: resolve(base, &cfg.paths.meter),
            weather: resolve(base, &cfg.paths.weather),
            tariffs: resolve(base, &cfg.paths.tariffs),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        self.panel.validate()?;
        self.rebate.validate()?;
        self.economics.validate()?;
        self.swarm.validate()?;
        self.bounds.constraints().validate()?;
        if !(self.model.bop_efficiency > 0.0 && self.model.bop_efficiency <= 1.0) {
            return Err(Error::Config(format!(
                "bop_efficiency {} outside (0, 1]",
                self.model.bop_efficiency
            )));
        }
        if !(0.0..=1.0).contains(&self.meter.min_coverage) {
            return Err(Error::Config("meter.min_coverage outside [0, 1]".into()));
        }
        for (what, p, dir) in [
            ("meter", &self.paths.meter, false),
            ("weather", &self.paths.weather, false),
            ("tariff", &self.paths.tariffs, true),
        ] {
            let ok = if dir { p.is_dir() } else { p.is_file() };
            if !ok {
                return Err(Error::Config(format!("{what} path {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}
