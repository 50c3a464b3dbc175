//! Daily-to-hourly insolation decomposition and HDKR transposition.
//!
//! Daily global horizontal insolation is split into diffuse and beam with the
//! Erbs daily correlation, distributed over the hours of the day with the
//! Collares-Pereira & Rabl (global) and Liu & Jordan (diffuse) profiles, and
//! finally projected onto the tilted plane with the Hay-Davies-Klucher-Reindl
//! model. All energies are kWh/m².

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::solar::{self, Orientation, SiteSpec, SolarInstant};

/// Upper bound on the daily clearness index accepted by the correlation.
pub const MAX_CLEARNESS_INDEX: f64 = 1.05;

// Erbs et al. daily diffuse fraction, as tabulated by Duffie & Beckman.
const ERBS_SUNSET_SPLIT_DEG: f64 = 81.4;
const ERBS_WINTER_KT_BREAK: f64 = 0.715;
const ERBS_WINTER_POLY: [f64; 5] = [1.0, -0.2727, 2.4495, -11.9514, 9.3879];
const ERBS_WINTER_CAP: f64 = 0.143;
const ERBS_SUMMER_KT_BREAK: f64 = 0.722;
const ERBS_SUMMER_POLY: [f64; 4] = [1.0, 0.2832, -2.5557, 0.8448];
const ERBS_SUMMER_CAP: f64 = 0.175;

// Collares-Pereira & Rabl coefficients: a = A0 + A1 sin(ω_s − 60°), b = B0 − B1 sin(ω_s − 60°).
const CPR_A0: f64 = 0.409;
const CPR_A1: f64 = 0.5016;
const CPR_B0: f64 = 0.6609;
const CPR_B1: f64 = 0.4767;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyInsolation {
    pub day_of_year: u32,
    pub global: f64,
    pub diffuse: f64,
    pub beam: f64,
    pub clearness_index: f64,
}

impl DailyInsolation {
    /// Split a daily global total into beam and diffuse for the given site.
    pub fn from_global(day_of_year: u32, global: f64, site: &SiteSpec) -> Result<Self> {
        if !(global >= 0.0) {
            return Err(Error::input(format!(
                "daily insolation {global} must be non-negative"
            )));
        }
        let h0 = solar::extraterrestrial_daily(site, day_of_year)?;
        let decl = solar::declination(day_of_year)?;
        let ws = solar::sunset_hour_angle(site.latitude_deg, decl)?.degrees;
        let kt = if h0 > 0.0 {
            (global / h0).clamp(0.0, MAX_CLEARNESS_INDEX)
        } else {
            0.0
        };
        let diffuse = global * erbs_daily_diffuse_fraction(kt, ws);
        Ok(DailyInsolation {
            day_of_year,
            global,
            diffuse,
            beam: global - diffuse,
            clearness_index: kt,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HourlyIrradiance {
    pub hour_index: usize,
    pub global: f64,
    pub beam: f64,
    pub diffuse: f64,
    pub tilted: f64,
    pub extraterrestrial: f64,
}

/// Orientation-independent part of an hour: geometry plus horizontal components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalHour {
    pub instant: SolarInstant,
    pub cos_zenith: f64,
    pub irradiance: HourlyIrradiance,
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Daily diffuse fraction `H_d / H`.
pub fn erbs_daily_diffuse_fraction(clearness_index: f64, sunset_hour_angle_deg: f64) -> f64 {
    let kt = clearness_index.clamp(0.0, MAX_CLEARNESS_INDEX);
    let fraction = if sunset_hour_angle_deg <= ERBS_SUNSET_SPLIT_DEG {
        if kt < ERBS_WINTER_KT_BREAK {
            poly(&ERBS_WINTER_POLY, kt)
        } else {
            ERBS_WINTER_CAP
        }
    } else if kt < ERBS_SUMMER_KT_BREAK {
        poly(&ERBS_SUMMER_POLY, kt)
    } else {
        ERBS_SUMMER_CAP
    };
    fraction.clamp(0.0, 1.0)
}

fn profile_shape(omega_deg: f64, sunset_deg: f64) -> f64 {
    if omega_deg.abs() >= sunset_deg {
        return 0.0;
    }
    let ws = sunset_deg.to_radians();
    let denom = ws.sin() - ws * ws.cos();
    if denom <= 0.0 {
        return 0.0;
    }
    PI / 24.0 * (omega_deg.to_radians().cos() - ws.cos()) / denom
}

/// Collares-Pereira & Rabl ratio of hourly to daily global insolation.
pub fn hourly_global_ratio(omega_deg: f64, sunset_deg: f64) -> f64 {
    let s = (sunset_deg - 60.0).to_radians().sin();
    let a = CPR_A0 + CPR_A1 * s;
    let b = CPR_B0 - CPR_B1 * s;
    let rt = (a + b * omega_deg.to_radians().cos()) * profile_shape(omega_deg, sunset_deg);
    rt.max(0.0)
}

/// Liu & Jordan ratio of hourly to daily diffuse insolation.
pub fn hourly_diffuse_ratio(omega_deg: f64, sunset_deg: f64) -> f64 {
    profile_shape(omega_deg, sunset_deg).max(0.0)
}

/// Tilt-dependent factors of the HDKR model, computed once per orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltTerms {
    pub sky_view: f64,
    pub ground_view: f64,
    pub horizon_brightening: f64,
}

impl TiltTerms {
    pub fn new(tilt_deg: f64) -> Self {
        let cos_b = tilt_deg.to_radians().cos();
        TiltTerms {
            sky_view: (1.0 + cos_b) / 2.0,
            ground_view: (1.0 - cos_b) / 2.0,
            horizon_brightening: (tilt_deg / 2.0).to_radians().sin().powi(3),
        }
    }
}

/// HDKR tilted-plane insolation for one hour.
///
/// `A_i = I_b / I_o` (0 when `I_o` is 0, capped at 1) and `f = sqrt(I_b / I)`.
pub fn tilted_plane(hour: &HourlyIrradiance, beam_ratio: f64, tilt_deg: f64, ground_reflectance: f64) -> f64 {
    tilted_plane_with(hour, beam_ratio, &TiltTerms::new(tilt_deg), ground_reflectance)
}

pub fn tilted_plane_with(hour: &HourlyIrradiance, beam_ratio: f64, tilt: &TiltTerms, ground_reflectance: f64) -> f64 {
    let global = hour.global;
    if global <= 0.0 {
        return 0.0;
    }
    let beam = hour.beam.max(0.0);
    let diffuse = hour.diffuse.max(0.0);
    let anisotropy = if hour.extraterrestrial > 0.0 {
        (beam / hour.extraterrestrial).min(1.0)
    } else {
        0.0
    };
    let modulation = (beam / global).sqrt();

    let beam_and_circumsolar = (beam + anisotropy * diffuse) * beam_ratio;
    let isotropic = (1.0 - anisotropy) * diffuse * tilt.sky_view * (1.0 + modulation * tilt.horizon_brightening);
    let reflected = global * ground_reflectance * tilt.ground_view;
    (beam_and_circumsolar + isotropic + reflected).max(0.0)
}

/// Hour-angle of the midpoint of clock hour `hour` on `day_of_year`.
pub fn hour_midpoint_angle(hour: usize, day_of_year: u32, site: &SiteSpec) -> Result<f64> {
    solar::solar_hour_angle(hour as f64 + 0.5, day_of_year, site)
}

/// Hourly horizontal global/beam/diffuse for one day.
pub fn horizontal_hours(daily: &DailyInsolation, site: &SiteSpec) -> Result<Vec<HorizontalHour>> {
    let decl = solar::declination(daily.day_of_year)?;
    let ws = solar::sunset_hour_angle(site.latitude_deg, decl)?.degrees;
    (0..24)
        .map(|hour| {
            let omega = hour_midpoint_angle(hour, daily.day_of_year, site)?;
            let instant = SolarInstant {
                day_of_year: daily.day_of_year,
                solar_hour_angle_deg: omega,
                declination_deg: decl,
            };
            let cos_zenith = solar::cos_zenith(site, &instant);
            let mut irr = HourlyIrradiance {
                hour_index: hour,
                ..Default::default()
            };
            if omega.abs() < ws && daily.global > 0.0 {
                let global = hourly_global_ratio(omega, ws) * daily.global;
                let diffuse = hourly_diffuse_ratio(omega, ws) * daily.diffuse;
                // the two profiles disagree near sunrise; keep I = I_b + I_d
                let (beam, diffuse) = if diffuse > global {
                    (0.0, global)
                } else {
                    (global - diffuse, diffuse)
                };
                irr.global = global;
                irr.beam = beam;
                irr.diffuse = diffuse;
                irr.extraterrestrial = solar::extraterrestrial_hourly(site, &instant);
            }
            Ok(HorizontalHour {
                instant,
                cos_zenith,
                irradiance: irr,
            })
        })
        .collect()
}

/// Project a horizontal hour onto a tilted plane.
pub fn transpose(hour: &HorizontalHour, site: &SiteSpec, orient: &Orientation) -> HourlyIrradiance {
    let mut irr = hour.irradiance;
    irr.tilted = if irr.global > 0.0 {
        let rb = solar::beam_ratio_for(site, &hour.instant, orient);
        tilted_plane(&irr, rb, orient.tilt_deg, site.ground_reflectance)
    } else {
        0.0
    };
    irr
}

/// All 24 hours of a day on the tilted plane.
pub fn decompose_day(
    daily: &DailyInsolation,
    site: &SiteSpec,
    orient: &Orientation,
) -> Result<Vec<HourlyIrradiance>> {
    Ok(horizontal_hours(daily, site)?
        .iter()
        .map(|h| transpose(h, site, orient))
        .collect())
}
