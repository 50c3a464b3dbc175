//! Solar geometry: declination, hour angles, incidence and extraterrestrial
//! insolation.
//!
//! Angles are in degrees at every public boundary. The incidence expansion is
//! the southern-hemisphere form, where an azimuth of 0 faces the equator
//! (north) and positive azimuths turn west.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solar constant, W/m².
pub const SOLAR_CONSTANT_W_M2: f64 = 1367.0;

/// Floor applied to the zenith cosine in the beam ratio denominator.
pub const MIN_COS_ZENITH_DEG: f64 = 85.0;

pub const DAYS_PER_YEAR: u32 = 365;

/// How clock hours in the input data relate to solar time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeBasis {
    /// Local standard (civil) time; longitude offset and equation of time are applied.
    #[default]
    Civil,
    /// Timestamps are already apparent solar time.
    Solar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteSpec {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub standard_meridian_deg: f64,
    #[serde(default = "default_ground_reflectance")]
    pub ground_reflectance: f64,
    #[serde(default)]
    pub time_basis: TimeBasis,
}

fn default_ground_reflectance() -> f64 {
    0.2
}

impl SiteSpec {
    pub fn new(latitude_deg: f64, longitude_deg: f64, standard_meridian_deg: f64) -> Result<Self> {
        let site = SiteSpec {
            latitude_deg,
            longitude_deg,
            standard_meridian_deg,
            ground_reflectance: default_ground_reflectance(),
            time_basis: TimeBasis::Civil,
        };
        site.validate()?;
        Ok(site)
    }

    /// Sydney, on the AEST meridian (150° E).
    pub fn sydney() -> Self {
        SiteSpec {
            latitude_deg: -33.86,
            longitude_deg: 151.21,
            standard_meridian_deg: 150.0,
            ground_reflectance: 0.2,
            time_basis: TimeBasis::Civil,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::input(format!(
                "latitude {} outside [-90, 90]",
                self.latitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::input(format!(
                "longitude {} outside [-180, 180]",
                self.longitude_deg
            )));
        }
        if !(-180.0..=180.0).contains(&self.standard_meridian_deg) {
            return Err(Error::input(format!(
                "standard meridian {} outside [-180, 180]",
                self.standard_meridian_deg
            )));
        }
        if !(0.0..=1.0).contains(&self.ground_reflectance) {
            return Err(Error::input(format!(
                "ground reflectance {} outside [0, 1]",
                self.ground_reflectance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarInstant {
    pub day_of_year: u32,
    pub solar_hour_angle_deg: f64,
    pub declination_deg: f64,
}

impl SolarInstant {
    /// Instant at a given day and hour angle, with the declination of that day.
    pub fn new(day_of_year: u32, solar_hour_angle_deg: f64) -> Result<Self> {
        Ok(SolarInstant {
            day_of_year,
            solar_hour_angle_deg,
            declination_deg: declination(day_of_year)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub tilt_deg: f64,
    pub azimuth_deg: f64,
}

impl Orientation {
    pub fn new(tilt_deg: f64, azimuth_deg: f64) -> Self {
        Orientation {
            tilt_deg,
            azimuth_deg,
        }
    }

    pub fn horizontal() -> Self {
        Orientation::new(0.0, 0.0)
    }
}

fn check_day(day_of_year: u32) -> Result<()> {
    if (1..=DAYS_PER_YEAR).contains(&day_of_year) {
        Ok(())
    } else {
        Err(Error::input(format!(
            "day of year {day_of_year} outside [1, {DAYS_PER_YEAR}]"
        )))
    }
}

/// Cooper's declination, degrees.
pub fn declination(day_of_year: u32) -> Result<f64> {
    check_day(day_of_year)?;
    let arg = 360.0 * (284.0 + day_of_year as f64) / 365.0;
    Ok(23.45 * arg.to_radians().sin())
}

/// Whether the sun rises and sets on a given day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaylightRegime {
    Normal,
    /// Sun never sets; hour angle clamped to 180°.
    PolarDay,
    /// Sun never rises; hour angle clamped to 0°.
    PolarNight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunsetHourAngle {
    pub degrees: f64,
    pub regime: DaylightRegime,
}

/// Sunset hour angle from `cos ω_s = −tan φ tan δ`.
pub fn sunset_hour_angle(latitude_deg: f64, declination_deg: f64) -> Result<SunsetHourAngle> {
    if latitude_deg.abs() >= 90.0 || latitude_deg.is_nan() {
        return Err(Error::input(format!(
            "latitude {latitude_deg} must satisfy |lat| < 90"
        )));
    }
    let c = -latitude_deg.to_radians().tan() * declination_deg.to_radians().tan();
    let (c, regime) = if c <= -1.0 {
        (-1.0, DaylightRegime::PolarDay)
    } else if c >= 1.0 {
        (1.0, DaylightRegime::PolarNight)
    } else {
        (c, DaylightRegime::Normal)
    };
    Ok(SunsetHourAngle {
        degrees: c.acos().to_degrees(),
        regime,
    })
}

/// Orientation-independent coefficients of the incidence expansion:
/// `cos θ = a·cos β + b·sin β·cos γ + c·sin β·sin γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl IncidenceCoefficients {
    /// Southern-hemisphere form: γ = 0 faces north, positive γ west.
    pub fn new(site: &SiteSpec, instant: &SolarInstant) -> Self {
        let (sin_d, cos_d) = instant.declination_deg.to_radians().sin_cos();
        let (sin_p, cos_p) = site.latitude_deg.to_radians().sin_cos();
        let (sin_w, cos_w) = instant.solar_hour_angle_deg.to_radians().sin_cos();
        IncidenceCoefficients {
            a: sin_d * sin_p + cos_d * cos_p * cos_w,
            b: sin_d * cos_p - cos_d * sin_p * cos_w,
            c: cos_d * sin_w,
        }
    }

    pub fn cos_incidence(&self, trig: &OrientationTrig) -> f64 {
        self.a * trig.cos_tilt + self.b * trig.sin_tilt * trig.cos_azimuth + self.c * trig.sin_tilt * trig.sin_azimuth
    }
}

/// Sines and cosines of an orientation, for evaluating many hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationTrig {
    pub sin_tilt: f64,
    pub cos_tilt: f64,
    pub sin_azimuth: f64,
    pub cos_azimuth: f64,
}

impl OrientationTrig {
    pub fn new(orient: &Orientation) -> Self {
        let (sin_tilt, cos_tilt) = orient.tilt_deg.to_radians().sin_cos();
        let (sin_azimuth, cos_azimuth) = orient.azimuth_deg.to_radians().sin_cos();
        OrientationTrig {
            sin_tilt,
            cos_tilt,
            sin_azimuth,
            cos_azimuth,
        }
    }
}

/// Cosine of the beam angle of incidence on a tilted surface.
///
/// Negative values mean the sun is behind the plane; callers clamp for
/// energy purposes.
pub fn cos_incidence(site: &SiteSpec, instant: &SolarInstant, orient: &Orientation) -> f64 {
    IncidenceCoefficients::new(site, instant).cos_incidence(&OrientationTrig::new(orient))
}

pub fn cos_zenith(site: &SiteSpec, instant: &SolarInstant) -> f64 {
    let (sin_d, cos_d) = instant.declination_deg.to_radians().sin_cos();
    let (sin_p, cos_p) = site.latitude_deg.to_radians().sin_cos();
    let cos_w = instant.solar_hour_angle_deg.to_radians().cos();
    cos_p * cos_d * cos_w + sin_p * sin_d
}

/// Ratio of tilted to horizontal beam, `max(0, cos θ) / max(cos θz, cos 85°)`.
pub fn beam_ratio(cos_theta: f64, cos_theta_z: f64) -> f64 {
    let floor = MIN_COS_ZENITH_DEG.to_radians().cos();
    cos_theta.max(0.0) / cos_theta_z.max(floor)
}

/// Beam ratio for a concrete orientation. A horizontal plane sees exactly the
/// horizontal beam, so the floor in [`beam_ratio`] is bypassed at zero tilt.
pub fn beam_ratio_for(site: &SiteSpec, instant: &SolarInstant, orient: &Orientation) -> f64 {
    let cz = cos_zenith(site, instant);
    if cz <= 0.0 {
        return 0.0;
    }
    if orient.tilt_deg == 0.0 {
        return 1.0;
    }
    beam_ratio(cos_incidence(site, instant, orient), cz)
}

fn eccentricity_factor(day_of_year: u32) -> f64 {
    1.0 + 0.033 * (360.0 * day_of_year as f64 / 365.0).to_radians().cos()
}

const JOULES_PER_KWH: f64 = 3.6e6;

/// Extraterrestrial insolation on a horizontal plane over the hour centred on
/// the instant's hour angle, kWh/m². The hour is clipped to sunrise/sunset.
pub fn extraterrestrial_hourly(site: &SiteSpec, instant: &SolarInstant) -> f64 {
    let Ok(ws) = sunset_hour_angle(site.latitude_deg, instant.declination_deg) else {
        return 0.0;
    };
    let w1 = (instant.solar_hour_angle_deg - 7.5).max(-ws.degrees);
    let w2 = (instant.solar_hour_angle_deg + 7.5).min(ws.degrees);
    if w2 <= w1 {
        return 0.0;
    }
    let (sin_d, cos_d) = instant.declination_deg.to_radians().sin_cos();
    let (sin_p, cos_p) = site.latitude_deg.to_radians().sin_cos();
    let geometric = cos_p * cos_d * (w2.to_radians().sin() - w1.to_radians().sin())
        + (w2 - w1).to_radians() * sin_p * sin_d;
    let joules = 12.0 * 3600.0 / std::f64::consts::PI
        * SOLAR_CONSTANT_W_M2
        * eccentricity_factor(instant.day_of_year)
        * geometric;
    (joules / JOULES_PER_KWH).max(0.0)
}

/// Daily extraterrestrial insolation on a horizontal plane, kWh/m².
pub fn extraterrestrial_daily(site: &SiteSpec, day_of_year: u32) -> Result<f64> {
    let decl = declination(day_of_year)?;
    let ws = sunset_hour_angle(site.latitude_deg, decl)?.degrees;
    let (sin_d, cos_d) = decl.to_radians().sin_cos();
    let (sin_p, cos_p) = site.latitude_deg.to_radians().sin_cos();
    let geometric = cos_p * cos_d * ws.to_radians().sin() + ws.to_radians() * sin_p * sin_d;
    let joules = 24.0 * 3600.0 / std::f64::consts::PI
        * SOLAR_CONSTANT_W_M2
        * eccentricity_factor(day_of_year)
        * geometric;
    Ok((joules / JOULES_PER_KWH).max(0.0))
}

/// Spencer's equation of time, minutes.
pub fn equation_of_time_minutes(day_of_year: u32) -> f64 {
    let b = ((day_of_year as f64 - 1.0) * 360.0 / 365.0).to_radians();
    229.2
        * (0.000075 + 0.001868 * b.cos()
            - 0.032077 * b.sin()
            - 0.014615 * (2.0 * b).cos()
            - 0.04089 * (2.0 * b).sin())
}

/// Hour angle at a local clock time (hours since midnight).
pub fn solar_hour_angle(clock_hour: f64, day_of_year: u32, site: &SiteSpec) -> Result<f64> {
    check_day(day_of_year)?;
    if !(0.0..24.0).contains(&clock_hour) {
        return Err(Error::input(format!("clock hour {clock_hour} outside [0, 24)")));
    }
    let solar_time = match site.time_basis {
        TimeBasis::Solar => clock_hour,
        TimeBasis::Civil => {
            let offset_min = 4.0 * (site.longitude_deg - site.standard_meridian_deg)
                + equation_of_time_minutes(day_of_year);
            clock_hour + offset_min / 60.0
        }
    };
    Ok(15.0 * (solar_time - 12.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn site(lat: f64) -> SiteSpec {
        SiteSpec {
            latitude_deg: lat,
            longitude_deg: 150.0,
            standard_meridian_deg: 150.0,
            ground_reflectance: 0.2,
            time_basis: TimeBasis::Civil,
        }
    }

    fn instant(day: u32, decl: f64, omega: f64) -> SolarInstant {
        SolarInstant {
            day_of_year: day,
            solar_hour_angle_deg: omega,
            declination_deg: decl,
        }
    }

    #[test]
    fn declination_examples() {
        assert_abs_diff_eq!(declination(81).unwrap(), 0.0, epsilon = 0.05);
        assert_abs_diff_eq!(declination(355).unwrap(), -23.45, epsilon = 0.1);
        assert_abs_diff_eq!(declination(172).unwrap(), 23.45, epsilon = 0.1);
        assert!((declination(1).unwrap() - declination(365).unwrap()).abs() < 0.2);
        assert!(declination(0).is_err());
        assert!(declination(366).is_err());
    }

    #[test]
    fn sunset_examples() {
        assert_abs_diff_eq!(sunset_hour_angle(0.0, 17.0).unwrap().degrees, 90.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sunset_hour_angle(-33.86, 0.0).unwrap().degrees, 90.0, epsilon = 1e-12);
        // arccos(-tan(-33.86°) tan(-23.45°)) = arccos(-0.29097) = 106.92°
        let ws = sunset_hour_angle(-33.86, -23.45).unwrap();
        assert_abs_diff_eq!(ws.degrees, 106.92, epsilon = 0.01);
        assert_eq!(ws.regime, DaylightRegime::Normal);
        assert!(sunset_hour_angle(90.0, 0.0).is_err());
    }

    #[test]
    fn sunset_polar_regimes() {
        let day = sunset_hour_angle(-80.0, -23.0).unwrap();
        assert_eq!(day.regime, DaylightRegime::PolarDay);
        assert_eq!(day.degrees, 180.0);
        let night = sunset_hour_angle(-80.0, 23.0).unwrap();
        assert_eq!(night.regime, DaylightRegime::PolarNight);
        assert_eq!(night.degrees, 0.0);
    }

    #[test]
    fn incidence_examples() {
        let s = site(-33.86);
        let noon = instant(81, 0.0, 0.0);
        let aligned = Orientation::new(33.86, 0.0);
        assert_abs_diff_eq!(cos_incidence(&s, &noon, &aligned), 1.0, epsilon = 1e-9);
        let south_wall = Orientation::new(90.0, 180.0);
        assert!(cos_incidence(&s, &noon, &south_wall) < 0.0);
        let flat = Orientation::new(0.0, 73.0);
        assert_abs_diff_eq!(
            cos_incidence(&s, &noon, &flat),
            cos_zenith(&s, &noon),
            epsilon = 1e-12
        );
    }

    #[test]
    fn zenith_examples() {
        assert_abs_diff_eq!(cos_zenith(&site(0.0), &instant(81, 0.0, 0.0)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            cos_zenith(&site(-33.86), &instant(81, 0.0, 0.0)),
            33.86f64.to_radians().cos(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(cos_zenith(&site(-33.86), &instant(81, 0.0, 90.0)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn beam_ratio_examples() {
        assert_abs_diff_eq!(beam_ratio(0.7, 0.7), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beam_ratio(0.9, 0.45), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beam_ratio(0.5, 0.01), 5.737, epsilon = 0.005);
        assert_eq!(beam_ratio(-0.3, 0.5), 0.0);
    }

    #[test]
    fn extraterrestrial_examples() {
        let eq = site(0.0);
        assert_eq!(extraterrestrial_hourly(&eq, &instant(81, 0.0, 170.0)), 0.0);
        let noon = extraterrestrial_hourly(&eq, &instant(81, 0.0, 0.0));
        assert_abs_diff_eq!(noon, 1.36, epsilon = 0.03);
        let afternoon = extraterrestrial_hourly(&eq, &instant(81, 0.0, 60.0));
        assert_abs_diff_eq!(afternoon / noon, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn daily_extraterrestrial_is_sum_of_hours() {
        let s = site(-33.86);
        for day in [1, 81, 172, 300] {
            let decl = declination(day).unwrap();
            let hourly: f64 = (0..24)
                .map(|h| extraterrestrial_hourly(&s, &instant(day, decl, 15.0 * (h as f64 + 0.5 - 12.0))))
                .sum();
            let daily = extraterrestrial_daily(&s, day).unwrap();
            assert_abs_diff_eq!(hourly, daily, epsilon = 1e-9);
        }
    }

    #[test]
    fn hour_angle_examples() {
        let s = site(-33.86);
        assert_abs_diff_eq!(solar_hour_angle(12.5, 105, &s).unwrap(), 7.5, epsilon = 0.5);
        // equation of time on day 105 is about -0.24 min, i.e. -0.06°
        assert_abs_diff_eq!(solar_hour_angle(12.0, 105, &s).unwrap(), 0.0, epsilon = 0.1);
        let mut east = s;
        east.longitude_deg += 1.0;
        let shift = solar_hour_angle(10.0, 200, &east).unwrap() - solar_hour_angle(10.0, 200, &s).unwrap();
        assert_abs_diff_eq!(shift, 1.0, epsilon = 1e-9);
        let mut solar = s;
        solar.time_basis = TimeBasis::Solar;
        assert_eq!(solar_hour_angle(12.0, 30, &solar).unwrap(), 0.0);
        assert!(solar_hour_angle(24.0, 30, &s).is_err());
    }

    proptest! {
        #[test]
        fn zenith_symmetric_in_hour_angle(lat in -89.0..89.0f64, decl in -23.45..23.45f64, w in 0.0..180.0f64) {
            let s = site(lat);
            let a = cos_zenith(&s, &instant(100, decl, w));
            let b = cos_zenith(&s, &instant(100, decl, -w));
            prop_assert!((a - b).abs() < 1e-15);
        }

        #[test]
        fn sunset_angles_complementary(lat in -65.99..65.99f64, decl in -23.45..23.45f64) {
            let a = sunset_hour_angle(lat, decl).unwrap().degrees;
            let b = sunset_hour_angle(lat, -decl).unwrap().degrees;
            prop_assert!((a + b - 180.0).abs() < 1e-9);
        }

        #[test]
        fn beam_ratio_non_negative(ct in -1.0..1.0f64, cz in -1.0..1.0f64) {
            prop_assert!(beam_ratio(ct, cz) >= 0.0);
        }

        #[test]
        fn beam_ratio_unity_on_identical_cosines(c in 0.08716..1.0f64) {
            prop_assert!((beam_ratio(c, c) - 1.0).abs() < 1e-15);
        }
    }
}
