//! Analytic Sun and Moon ephemerides.
//!
//! Two providers sit behind [`Ephemeris`]:
//! * `keplerian_secular` — geocentric Keplerian mean elements at J2000 with
//!   linear secular rates, evaluated in the ecliptic frame and rotated to the
//!   equatorial ECI frame. Smooth and bounded; the element sets ship in the
//!   physics configuration file and the defaults below.
//! * `circular_test` — circular coplanar orbits of configurable radius, rate
//!   and phase, for tests that need trivially predictable geometry.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::frames::{Epoch, DEG_TO_RAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyId {
    Sun,
    Moon,
}

/// Geocentric Keplerian mean elements with linear secular rates. Angles are
/// degrees in the ecliptic-of-J2000 frame; rates are per day.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct BodyElements {
    pub semi_major_axis_km: f64,
    pub eccentricity: f64,
    pub eccentricity_per_day: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub raan_deg_per_day: f64,
    pub arg_perigee_deg: f64,
    pub arg_perigee_deg_per_day: f64,
    pub mean_anomaly_deg: f64,
    pub mean_anomaly_deg_per_day: f64,
}

impl Default for BodyElements {
    fn default() -> Self {
        // A placeholder that parses; real sets come from the presets below.
        Self {
            semi_major_axis_km: 1.0,
            eccentricity: 0.0,
            eccentricity_per_day: 0.0,
            inclination_deg: 0.0,
            raan_deg: 0.0,
            raan_deg_per_day: 0.0,
            arg_perigee_deg: 0.0,
            arg_perigee_deg_per_day: 0.0,
            mean_anomaly_deg: 0.0,
            mean_anomaly_deg_per_day: 0.0,
        }
    }
}

impl BodyElements {
    /// Geocentric mean solar elements at J2000 (apparent orbit of the Sun),
    /// ecliptic frame.
    pub fn sun_j2000() -> Self {
        Self {
            semi_major_axis_km: 1.495_978_707e8,
            eccentricity: 0.016_709,
            eccentricity_per_day: -1.151e-9,
            inclination_deg: 0.0,
            raan_deg: 0.0,
            raan_deg_per_day: 0.0,
            arg_perigee_deg: 282.940_47,
            arg_perigee_deg_per_day: 4.709_35e-5,
            mean_anomaly_deg: 357.525_40,
            mean_anomaly_deg_per_day: 0.985_600_258_5,
        }
    }

    /// Geocentric mean lunar elements at J2000, ecliptic frame. The node
    /// regression and perigee precession rates carry the dominant secular
    /// variations of the lunar orbit.
    pub fn moon_j2000() -> Self {
        Self {
            semi_major_axis_km: 384_400.0,
            eccentricity: 0.054_900,
            eccentricity_per_day: 0.0,
            inclination_deg: 5.1454,
            raan_deg: 125.043_37,
            raan_deg_per_day: -0.052_953_808_3,
            arg_perigee_deg: 318.309_94,
            arg_perigee_deg_per_day: 0.164_357_322_3,
            mean_anomaly_deg: 134.962_89,
            mean_anomaly_deg_per_day: 13.064_992_950_9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EphemerisElements {
    pub sun: BodyElements,
    pub moon: BodyElements,
}

impl Default for EphemerisElements {
    fn default() -> Self {
        Self {
            sun: BodyElements::sun_j2000(),
            moon: BodyElements::moon_j2000(),
        }
    }
}

/// Circular coplanar test orbit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CircularBody {
    pub radius_km: f64,
    /// Orbit rate, deg/day. When zero the body is held fixed at its phase.
    pub rate_deg_day: f64,
    pub phase0_deg: f64,
}

impl Default for CircularBody {
    fn default() -> Self {
        Self {
            radius_km: 384_400.0,
            rate_deg_day: 360.0 / 27.321_661,
            phase0_deg: 0.0,
        }
    }
}

/// Ephemeris provider selection, written as `model = "..."` in configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum EphemerisConfig {
    KeplerianSecular {
        #[serde(default)]
        elements: EphemerisElements,
    },
    CircularTest {
        #[serde(default = "circular_sun_default")]
        sun: CircularBody,
        #[serde(default)]
        moon: CircularBody,
    },
}

fn circular_sun_default() -> CircularBody {
    CircularBody {
        radius_km: 1.495_978_707e8,
        rate_deg_day: 360.0 / 365.25,
        phase0_deg: 0.0,
    }
}

impl Default for EphemerisConfig {
    fn default() -> Self {
        EphemerisConfig::KeplerianSecular {
            elements: EphemerisElements::default(),
        }
    }
}

/// Earth-relative Sun and Moon positions at one epoch, km, ECI.
#[derive(Debug, Clone, Copy)]
pub struct EphemerisSample {
    pub sun_from_earth_km: Vector3<f64>,
    pub moon_from_earth_km: Vector3<f64>,
}

impl EphemerisSample {
    /// Body vectors re-centred on a spacecraft at ECI position `r`.
    pub fn body_from_spacecraft(&self, body: BodyId, r_km: &Vector3<f64>) -> Vector3<f64> {
        match body {
            BodyId::Sun => self.sun_from_earth_km - r_km,
            BodyId::Moon => self.moon_from_earth_km - r_km,
        }
    }
}

/// Resolved ephemeris provider.
#[derive(Debug, Clone, PartialEq)]
pub struct Ephemeris {
    config: EphemerisConfig,
    obliquity_rad: f64,
}

impl Ephemeris {
    pub fn new(config: EphemerisConfig, constants: &Constants) -> Self {
        Self {
            config,
            obliquity_rad: constants.obliquity_deg * DEG_TO_RAD,
        }
    }

    pub fn config(&self) -> &EphemerisConfig {
        &self.config
    }

    /// Earth-centred inertial position of a body, km.
    pub fn body_position(&self, epoch: Epoch, body: BodyId) -> Vector3<f64> {
        match &self.config {
            EphemerisConfig::KeplerianSecular { elements } => {
                let el = match body {
                    BodyId::Sun => &elements.sun,
                    BodyId::Moon => &elements.moon,
                };
                let ecliptic = kepler_position(el, epoch);
                rotate_ecliptic_to_equatorial(&ecliptic, self.obliquity_rad)
            }
            EphemerisConfig::CircularTest { sun, moon } => {
                let b = match body {
                    BodyId::Sun => sun,
                    BodyId::Moon => moon,
                };
                let angle = (b.phase0_deg + b.rate_deg_day * epoch.days()) * DEG_TO_RAD;
                Vector3::new(b.radius_km * angle.cos(), b.radius_km * angle.sin(), 0.0)
            }
        }
    }

    /// Earth-centred inertial position and velocity of a body, km and km/s.
    ///
    /// For the Keplerian-secular model the velocity is a central finite
    /// difference of the analytic position (1 s step); the model is smooth so
    /// the truncation error is far below any use of the value here.
    pub fn body_state(&self, epoch: Epoch, body: BodyId) -> (Vector3<f64>, Vector3<f64>) {
        match &self.config {
            EphemerisConfig::CircularTest { sun, moon } => {
                let b = match body {
                    BodyId::Sun => sun,
                    BodyId::Moon => moon,
                };
                let rate_rad_s = b.rate_deg_day * DEG_TO_RAD / 86_400.0;
                let angle = (b.phase0_deg + b.rate_deg_day * epoch.days()) * DEG_TO_RAD;
                let r = Vector3::new(b.radius_km * angle.cos(), b.radius_km * angle.sin(), 0.0);
                let v = Vector3::new(
                    -b.radius_km * rate_rad_s * angle.sin(),
                    b.radius_km * rate_rad_s * angle.cos(),
                    0.0,
                );
                (r, v)
            }
            EphemerisConfig::KeplerianSecular { .. } => {
                let h = 1.0; // seconds
                let r = self.body_position(epoch, body);
                let r_plus = self.body_position(epoch.add_seconds(h), body);
                let r_minus = self.body_position(epoch.add_seconds(-h), body);
                (r, (r_plus - r_minus) / (2.0 * h))
            }
        }
    }

    pub fn sample(&self, epoch: Epoch) -> EphemerisSample {
        EphemerisSample {
            sun_from_earth_km: self.body_position(epoch, BodyId::Sun),
            moon_from_earth_km: self.body_position(epoch, BodyId::Moon),
        }
    }
}

/// Solve Kepler's equation M = E - e sin E by Newton iteration.
pub fn solve_kepler(mean_anomaly_rad: f64, eccentricity: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eccentricity) {
        return Err(Error::InvalidArgument(format!(
            "elliptic Kepler solver needs e in [0, 1), got {eccentricity}"
        )));
    }
    let m = mean_anomaly_rad.rem_euclid(std::f64::consts::TAU);
    let mut e_anom = if eccentricity > 0.8 { std::f64::consts::PI } else { m };
    for _ in 0..50 {
        let f = e_anom - eccentricity * e_anom.sin() - m;
        let fp = 1.0 - eccentricity * e_anom.cos();
        let step = f / fp;
        e_anom -= step;
        if step.abs() < 1e-14 {
            return Ok(e_anom);
        }
    }
    Ok(e_anom)
}

fn kepler_position(el: &BodyElements, epoch: Epoch) -> Vector3<f64> {
    let t = epoch.days();
    let e = (el.eccentricity + el.eccentricity_per_day * t).clamp(0.0, 0.999);
    let raan = (el.raan_deg + el.raan_deg_per_day * t) * DEG_TO_RAD;
    let argp = (el.arg_perigee_deg + el.arg_perigee_deg_per_day * t) * DEG_TO_RAD;
    let inc = el.inclination_deg * DEG_TO_RAD;
    let mean_anom = (el.mean_anomaly_deg + el.mean_anomaly_deg_per_day * t) * DEG_TO_RAD;

    let e_anom = solve_kepler(mean_anom, e).expect("eccentricity validated above");
    let a = el.semi_major_axis_km;
    // Perifocal coordinates.
    let x_p = a * (e_anom.cos() - e);
    let y_p = a * (1.0 - e * e).sqrt() * e_anom.sin();

    let (sin_o, cos_o) = raan.sin_cos();
    let (sin_w, cos_w) = argp.sin_cos();
    let (sin_i, cos_i) = inc.sin_cos();

    Vector3::new(
        (cos_o * cos_w - sin_o * sin_w * cos_i) * x_p
            + (-cos_o * sin_w - sin_o * cos_w * cos_i) * y_p,
        (sin_o * cos_w + cos_o * sin_w * cos_i) * x_p
            + (-sin_o * sin_w + cos_o * cos_w * cos_i) * y_p,
        (sin_w * sin_i) * x_p + (cos_w * sin_i) * y_p,
    )
}

fn rotate_ecliptic_to_equatorial(r: &Vector3<f64>, obliquity_rad: f64) -> Vector3<f64> {
    let (sin_e, cos_e) = obliquity_rad.sin_cos();
    Vector3::new(
        r.x,
        r.y * cos_e - r.z * sin_e,
        r.y * sin_e + r.z * cos_e,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn realistic() -> Ephemeris {
        Ephemeris::new(EphemerisConfig::default(), &Constants::default())
    }

    #[test]
    fn circular_moon_configuration_echo() {
        let config = EphemerisConfig::CircularTest {
            sun: circular_sun_default(),
            moon: CircularBody {
                radius_km: 384_400.0,
                rate_deg_day: 13.0,
                phase0_deg: 0.0,
            },
        };
        let eph = Ephemeris::new(config, &Constants::default());
        let r = eph.body_position(Epoch::mjd2000(0.0), BodyId::Moon);
        assert!((r - Vector3::new(384_400.0, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn moon_radius_bounds_over_one_year() {
        let eph = realistic();
        for day in 0..366 {
            let r = eph.body_position(Epoch::mjd2000(day as f64), BodyId::Moon).norm();
            assert!(
                (3.56e5..=4.07e5).contains(&r),
                "moon radius {r} km out of bounds at day {day}"
            );
        }
    }

    #[test]
    fn sun_radius_bounds_over_one_year() {
        let eph = realistic();
        for day in 0..366 {
            let r = eph.body_position(Epoch::mjd2000(day as f64), BodyId::Sun).norm();
            assert!(
                (1.47e8..=1.521e8).contains(&r),
                "sun radius {r} km out of bounds at day {day}"
            );
        }
    }

    #[test]
    fn positions_are_continuous() {
        let eph = realistic();
        let h = 1.0 / 86_400.0; // one second
        for &t in &[0.0, 100.3, 2000.7, 5500.1] {
            for body in [BodyId::Sun, BodyId::Moon] {
                let a = eph.body_position(Epoch::mjd2000(t), body);
                let b = eph.body_position(Epoch::mjd2000(t + h), body);
                // One second of motion: well under 2 km for the Moon,
                // 31 km for the Sun's apparent geocentric orbit.
                assert!((a - b).norm() < 40.0);
            }
        }
    }

    #[test]
    fn finite_difference_velocity_consistent() {
        let eph = realistic();
        let (r0, v) = eph.body_state(Epoch::mjd2000(345.6), BodyId::Moon);
        let dt = 60.0;
        let r1 = eph.body_position(Epoch::mjd2000(345.6).add_seconds(dt), BodyId::Moon);
        let predicted = r0 + v * dt;
        assert!((predicted - r1).norm() < 0.1, "drift {}", (predicted - r1).norm());
    }

    #[test]
    fn kepler_solver_residual() {
        for &e in &[0.0, 0.1, 0.5, 0.9, 0.97] {
            for k in 0..20 {
                let m = k as f64 * 0.33;
                let big_e = solve_kepler(m, e).unwrap();
                let res = big_e - e * big_e.sin() - m.rem_euclid(std::f64::consts::TAU);
                assert!(res.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_model_id_rejected() {
        let text = "model = \"chebyshev\"\n";
        let parsed: std::result::Result<EphemerisConfig, _> = toml::from_str(text);
        assert!(parsed.is_err());
    }
}
