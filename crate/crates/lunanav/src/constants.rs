//! Physical constants shared by the propagator, the observation model and
//! every test oracle. Values load from one TOML file so that main code and
//! oracles cannot drift apart; [`Constants::default`] carries the same
//! reference values that ship in `config/physics.toml`.
//!
//! Unit conventions are encoded in the field names (`_km3_s2`, `_deg_day`,
//! ...). All angles are degrees unless a name says otherwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Earth gravitational parameter, km^3/s^2.
    pub mu_earth_km3_s2: f64,
    /// Sun gravitational parameter, km^3/s^2.
    pub mu_sun_km3_s2: f64,
    /// Moon gravitational parameter, km^3/s^2.
    pub mu_moon_km3_s2: f64,
    /// Earth rotation rate, deg/day.
    pub omega_earth_deg_day: f64,
    /// ECI/ECEF rotation angle at the J2000 epoch, deg.
    pub theta0_deg: f64,
    /// Mean Earth radius, km (spherical station model).
    pub earth_radius_km: f64,
    /// WGS-84 equatorial radius, km (geodetic station model).
    pub earth_equatorial_radius_km: f64,
    /// WGS-84 flattening, dimensionless.
    pub earth_flattening: f64,
    /// Mean Moon radius, km.
    pub moon_radius_km: f64,
    /// Astronomical unit, km.
    pub au_km: f64,
    /// Solar radiation pressure at 1 AU, N/m^2.
    pub srp_pressure_1au_n_m2: f64,
    /// Mean obliquity of the ecliptic at J2000, deg.
    pub obliquity_deg: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            mu_earth_km3_s2: 398_600.4418,
            mu_sun_km3_s2: 1.327_124_400_18e11,
            mu_moon_km3_s2: 4_902.800_066,
            omega_earth_deg_day: 360.985_647_3,
            theta0_deg: 280.4606,
            earth_radius_km: 6_371.0084,
            earth_equatorial_radius_km: 6_378.137,
            earth_flattening: 1.0 / 298.257_223_563,
            moon_radius_km: 1_737.4,
            au_km: 1.495_978_707e8,
            srp_pressure_1au_n_m2: 4.56e-6,
            obliquity_deg: 23.439_291_11,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_earth_km3_s2", self.mu_earth_km3_s2),
            ("mu_sun_km3_s2", self.mu_sun_km3_s2),
            ("mu_moon_km3_s2", self.mu_moon_km3_s2),
            ("omega_earth_deg_day", self.omega_earth_deg_day),
            ("earth_radius_km", self.earth_radius_km),
            ("moon_radius_km", self.moon_radius_km),
            ("au_km", self.au_km),
            ("srp_pressure_1au_n_m2", self.srp_pressure_1au_n_m2),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!(
                    "constant {name} must be strictly positive, got {value}"
                )));
            }
        }
        if !(self.mu_sun_km3_s2 > self.mu_earth_km3_s2
            && self.mu_earth_km3_s2 > self.mu_moon_km3_s2)
        {
            return Err(Error::Config(
                "gravitational parameters must satisfy mu_sun > mu_earth > mu_moon".into(),
            ));
        }
        Ok(())
    }
}
