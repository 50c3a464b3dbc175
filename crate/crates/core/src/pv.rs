//! PV array yield: NOCT cell temperature, temperature-corrected efficiency and
//! hourly array energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::insolation::HourlyIrradiance;

/// Irradiance and ambient temperature of the NOCT test condition.
const NOCT_IRRADIANCE_W_M2: f64 = 800.0;
const NOCT_AMBIENT_C: f64 = 20.0;
const STC_CELL_C: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub name: String,
    pub rated_power_w: f64,
    pub area_m2: f64,
    pub eta_stc: f64,
    /// Temperature coefficient of maximum power as a fraction per °C (−0.0041 = −0.41 %/°C).
    pub mu_mpp_per_degc: f64,
    pub t_noct_degc: f64,
}

impl Default for PanelSpec {
    /// Trina TSM-PD05.05, 250 W polycrystalline (manufacturer datasheet values).
    fn default() -> Self {
        PanelSpec {
            name: "Trina TSM-PD05.05 250W".to_string(),
            rated_power_w: 250.0,
            area_m2: 1.64,
            eta_stc: 0.1527,
            mu_mpp_per_degc: -0.0041,
            t_noct_degc: 44.0,
        }
    }
}

impl PanelSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: String| Err(Error::Input(format!("panel `{}`: {what}", self.name)));
        if !(self.eta_stc > 0.0 && self.eta_stc < 0.3) {
            return fail(format!("eta_stc {} outside (0, 0.3)", self.eta_stc));
        }
        if !(self.mu_mpp_per_degc > -0.01 && self.mu_mpp_per_degc < 0.0) {
            return fail(format!(
                "mu_mpp {} outside (-0.01, 0)",
                self.mu_mpp_per_degc
            ));
        }
        if !(self.t_noct_degc > 30.0 && self.t_noct_degc < 60.0) {
            return fail(format!("T_NOCT {} outside (30, 60)", self.t_noct_degc));
        }
        if !(self.area_m2 > 0.0 && self.rated_power_w > 0.0) {
            return fail("area and rated power must be positive".to_string());
        }
        let nominal = self.eta_stc * self.area_m2 * 1000.0;
        if ((self.rated_power_w - nominal) / nominal).abs() > 0.02 {
            return fail(format!(
                "rated power {} W inconsistent with eta*area*1000 = {nominal:.1} W",
                self.rated_power_w
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub tilt_deg: f64,
    pub azimuth_deg: f64,
    pub panel_count: u32,
    pub bop_efficiency: f64,
}

impl ArrayConfig {
    pub fn new(tilt_deg: f64, azimuth_deg: f64, panel_count: u32) -> Self {
        ArrayConfig {
            tilt_deg,
            azimuth_deg,
            panel_count,
            bop_efficiency: DEFAULT_BOP_EFFICIENCY,
        }
    }
}

pub const DEFAULT_BOP_EFFICIENCY: f64 = 0.90;

/// How the datasheet temperature coefficient enters the efficiency correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TempCoefficientMode {
    /// Coefficient is relative to STC efficiency: Δη = μ·η_STC per °C.
    #[default]
    Relative,
    /// Coefficient is added to efficiency directly: Δη = μ per °C.
    Absolute,
}

/// Reference temperature the cell temperature is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TempReference {
    #[default]
    Ambient,
    Stc25,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PvModelOptions {
    #[serde(default)]
    pub temp_coefficient: TempCoefficientMode,
    #[serde(default)]
    pub temp_reference: TempReference,
}

pub fn cell_temperature(irradiance_w_m2: f64, t_ambient_degc: f64, panel: &PanelSpec) -> f64 {
    t_ambient_degc
        + (panel.t_noct_degc - NOCT_AMBIENT_C)
            * (irradiance_w_m2.max(0.0) / NOCT_IRRADIANCE_W_M2)
            * (1.0 - panel.eta_stc)
}

/// Temperature-corrected maximum power point efficiency, floored at zero.
pub fn operating_efficiency(
    t_cell_degc: f64,
    t_ambient_degc: f64,
    panel: &PanelSpec,
    opts: &PvModelOptions,
) -> f64 {
    let reference = match opts.temp_reference {
        TempReference::Ambient => t_ambient_degc,
        TempReference::Stc25 => STC_CELL_C,
    };
    let mu = match opts.temp_coefficient {
        TempCoefficientMode::Relative => panel.mu_mpp_per_degc * panel.eta_stc,
        TempCoefficientMode::Absolute => panel.mu_mpp_per_degc,
    };
    (panel.eta_stc + mu * (t_cell_degc - reference)).max(0.0)
}

/// Energy from one panel for an hour with `tilted_kwh_m2` on the plane.
pub fn panel_hourly_energy(
    tilted_kwh_m2: f64,
    t_ambient_degc: f64,
    panel: &PanelSpec,
    bop_efficiency: f64,
    opts: &PvModelOptions,
) -> f64 {
    if tilted_kwh_m2 <= 0.0 {
        return 0.0;
    }
    // mean irradiance over the hour
    let g = tilted_kwh_m2 * 1000.0;
    let tc = cell_temperature(g, t_ambient_degc, panel);
    let eta = operating_efficiency(tc, t_ambient_degc, panel, opts);
    panel.area_m2 * tilted_kwh_m2 * eta * bop_efficiency
}

/// Array output for one hour, kWh.
pub fn hourly_energy(
    irr: &HourlyIrradiance,
    t_ambient_degc: f64,
    panel: &PanelSpec,
    cfg: &ArrayConfig,
    opts: &PvModelOptions,
) -> f64 {
    cfg.panel_count as f64
        * panel_hourly_energy(irr.tilted, t_ambient_degc, panel, cfg.bop_efficiency, opts)
}
