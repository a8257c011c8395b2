//! Time, reference frames and orbital-energy utilities.
//!
//! Frames used throughout the crate:
//! * ECI — Earth-centred inertial, J2000 equatorial. All state vectors are
//!   ECI unless a function says otherwise.
//! * ECEF — Earth-centred Earth-fixed, rotated from ECI about +z by the
//!   sidereal angle [`gmst_angle`].
//! * SEZ — topocentric South/East/Zenith axes of a ground station.
//! * r-t-h — orbit-local radial/transversal/out-of-plane axes; manoeuvres
//!   and corridor deviations are expressed here.
//!
//! Units: km, km/s, degrees; epochs are days since J2000 (MJD2000).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};

pub const DEG_TO_RAD: f64 = std::f64::consts::PI / 180.0;
pub const RAD_TO_DEG: f64 = 180.0 / std::f64::consts::PI;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Days since the J2000 epoch (MJD2000).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epoch(f64);

impl Epoch {
    pub fn mjd2000(days: f64) -> Self {
        Epoch(days)
    }

    pub fn days(self) -> f64 {
        self.0
    }

    pub fn seconds(self) -> f64 {
        self.0 * SECONDS_PER_DAY
    }

    pub fn from_seconds(sec: f64) -> Self {
        Epoch(sec / SECONDS_PER_DAY)
    }

    pub fn add_days(self, days: f64) -> Self {
        Epoch(self.0 + days)
    }

    pub fn add_seconds(self, sec: f64) -> Self {
        Epoch(self.0 + sec / SECONDS_PER_DAY)
    }
}

impl std::fmt::Display for Epoch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.9} MJD2000", self.0)
    }
}

/// Inertial position/velocity pair at an epoch (ECI unless stated otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    /// Position, km.
    pub position_km: Vector3<f64>,
    /// Velocity, km/s.
    pub velocity_km_s: Vector3<f64>,
    pub epoch: Epoch,
}

impl StateVector {
    pub fn new(position_km: Vector3<f64>, velocity_km_s: Vector3<f64>, epoch: Epoch) -> Self {
        Self {
            position_km,
            velocity_km_s,
            epoch,
        }
    }

    /// Six-vector [r; v] view used by filters and tensors.
    pub fn to_vector6(&self) -> nalgebra::Vector6<f64> {
        nalgebra::Vector6::new(
            self.position_km.x,
            self.position_km.y,
            self.position_km.z,
            self.velocity_km_s.x,
            self.velocity_km_s.y,
            self.velocity_km_s.z,
        )
    }

    pub fn from_vector6(v: &nalgebra::Vector6<f64>, epoch: Epoch) -> Self {
        Self {
            position_km: Vector3::new(v[0], v[1], v[2]),
            velocity_km_s: Vector3::new(v[3], v[4], v[5]),
            epoch,
        }
    }
}

/// Tracking station on the Earth surface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GroundStation {
    pub name: String,
    /// Geodetic latitude, deg, in [-90, 90].
    pub latitude_deg: f64,
    /// East longitude, deg.
    pub longitude_deg: f64,
    /// Altitude above mean sea level, m.
    pub altitude_m: f64,
    /// Tracking cut-off elevation, deg, in [0, 90).
    pub min_elevation_deg: f64,
    /// When false (default) the site position uses a spherical Earth of mean
    /// radius plus altitude; when true the WGS-84 ellipsoid is used.
    pub use_geodetic_shape: bool,
}

impl Default for GroundStation {
    /// Raisting station parameters used by the shipped scenario.
    fn default() -> Self {
        Self {
            name: "raisting".into(),
            latitude_deg: 47.90221,
            longitude_deg: 11.11579,
            altitude_m: 553.0,
            min_elevation_deg: 1.0,
            use_geodetic_shape: false,
        }
    }
}

impl GroundStation {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::Config(format!(
                "station latitude {} outside [-90, 90] deg",
                self.latitude_deg
            )));
        }
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return Err(Error::Config(format!(
                "minimum elevation {} outside [0, 90) deg",
                self.min_elevation_deg
            )));
        }
        Ok(())
    }

    /// Station position in the Earth-fixed frame, km.
    pub fn position_ecef_km(&self, constants: &Constants) -> Vector3<f64> {
        let lat = self.latitude_deg * DEG_TO_RAD;
        let lon = self.longitude_deg * DEG_TO_RAD;
        let alt_km = self.altitude_m * 1e-3;
        if self.use_geodetic_shape {
            let a = constants.earth_equatorial_radius_km;
            let e2 = constants.earth_flattening * (2.0 - constants.earth_flattening);
            let n = a / (1.0 - e2 * lat.sin().powi(2)).sqrt();
            Vector3::new(
                (n + alt_km) * lat.cos() * lon.cos(),
                (n + alt_km) * lat.cos() * lon.sin(),
                (n * (1.0 - e2) + alt_km) * lat.sin(),
            )
        } else {
            let r = constants.earth_radius_km + alt_km;
            Vector3::new(
                r * lat.cos() * lon.cos(),
                r * lat.cos() * lon.sin(),
                r * lat.sin(),
            )
        }
    }
}

/// Reduce an angle in degrees to [0, 360).
pub fn wrap_degrees(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(360.0);
    if wrapped == 360.0 {
        0.0
    } else {
        wrapped
    }
}

/// Wrap an angle difference in degrees to (-180, 180].
pub fn wrap_degrees_symmetric(delta: f64) -> f64 {
    let w = wrap_degrees(delta);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Rotation angle between ECI and ECEF about +z, deg in [0, 360).
pub fn gmst_angle(epoch: Epoch, constants: &Constants) -> f64 {
    wrap_degrees(constants.theta0_deg + constants.omega_earth_deg_day * epoch.days())
}

/// The ECI -> ECEF -> SEZ rotation chain of a station at an epoch, plus the
/// station's instantaneous ECI position.
#[derive(Debug, Clone)]
pub struct FrameChain {
    /// Maps ECI components to ECEF components.
    pub eci_to_ecef: Matrix3<f64>,
    /// Maps ECEF components to topocentric SEZ components.
    pub ecef_to_sez: Matrix3<f64>,
    /// Station position in ECI, km.
    pub station_eci_km: Vector3<f64>,
    /// Station position in ECEF, km.
    pub station_ecef_km: Vector3<f64>,
}

impl FrameChain {
    /// Composite ECI -> SEZ rotation.
    pub fn eci_to_sez(&self) -> Matrix3<f64> {
        self.ecef_to_sez * self.eci_to_ecef
    }

    /// Station velocity in ECI due to Earth rotation, km/s.
    pub fn station_velocity_eci_km_s(&self, constants: &Constants) -> Vector3<f64> {
        let omega_rad_s = constants.omega_earth_deg_day * DEG_TO_RAD / SECONDS_PER_DAY;
        Vector3::new(0.0, 0.0, omega_rad_s).cross(&self.station_eci_km)
    }
}

/// Build the rotation pair (A_ECI->ECEF, A_ECEF->SEZ) and the station ECI
/// position at `epoch`.
pub fn eci_ecef_sez_chain(
    epoch: Epoch,
    station: &GroundStation,
    constants: &Constants,
) -> FrameChain {
    let theta = gmst_angle(epoch, constants) * DEG_TO_RAD;
    let (sin_t, cos_t) = theta.sin_cos();
    // Rotation about +z by the sidereal angle: ECEF = Rz(theta) * ECI.
    let eci_to_ecef = Matrix3::new(
        cos_t, sin_t, 0.0, //
        -sin_t, cos_t, 0.0, //
        0.0, 0.0, 1.0,
    );

    let lat = station.latitude_deg * DEG_TO_RAD;
    let lon = station.longitude_deg * DEG_TO_RAD;
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    // Rows are the South, East and Zenith unit vectors in ECEF components.
    let ecef_to_sez = Matrix3::new(
        sin_lat * cos_lon,
        sin_lat * sin_lon,
        -cos_lat,
        -sin_lon,
        cos_lon,
        0.0,
        cos_lat * cos_lon,
        cos_lat * sin_lon,
        sin_lat,
    );

    let station_ecef_km = station.position_ecef_km(constants);
    let station_eci_km = eci_to_ecef.transpose() * station_ecef_km;

    FrameChain {
        eci_to_ecef,
        ecef_to_sez,
        station_eci_km,
        station_ecef_km,
    }
}

/// Rotation from ECI into the orbit-local r-t-h frame of a state. Rows are
/// the radial, transversal and out-of-plane unit axes, in that order, so the
/// matrix maps ECI components to (r, t, h) components and its determinant
/// is +1.
pub fn rth_rotation(state: &StateVector) -> Result<Matrix3<f64>> {
    let r = state.position_km;
    let v = state.velocity_km_s;
    if r.norm() == 0.0 || v.norm() == 0.0 {
        return Err(Error::DegenerateGeometry(
            "r-t-h frame undefined for zero position or velocity".into(),
        ));
    }
    let h = r.cross(&v);
    // Rectilinear orbits have no transversal direction.
    if h.norm() <= 1e-12 * r.norm() * v.norm() {
        return Err(Error::DegenerateGeometry(format!(
            "r-t-h frame undefined: r and v are parallel (|r x v| = {:.3e})",
            h.norm()
        )));
    }
    let r_hat = r / r.norm();
    let h_hat = h / h.norm();
    let t_hat = h_hat.cross(&r_hat);
    Ok(Matrix3::from_rows(&[
        r_hat.transpose(),
        t_hat.transpose(),
        h_hat.transpose(),
    ]))
}

/// Characteristic two-body energy relative to the Moon, km^2/s^2.
///
/// `r` and `v` are the Moon-relative position and velocity. Negative values
/// mean the state is gravitationally bound at arrival.
pub fn c3_energy(r_km: &Vector3<f64>, v_km_s: &Vector3<f64>, mu_moon_km3_s2: f64) -> Result<f64> {
    let radius = r_km.norm();
    if radius == 0.0 {
        return Err(Error::Singularity {
            body: "moon",
            radius_km: 0.0,
        });
    }
    Ok(v_km_s.norm_squared() - 2.0 * mu_moon_km3_s2 / radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn constants() -> Constants {
        Constants::default()
    }

    #[test]
    fn gmst_at_j2000_is_theta0() {
        assert_relative_eq!(
            gmst_angle(Epoch::mjd2000(0.0), &constants()),
            280.4606,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gmst_periodicity() {
        let c = constants();
        let period = 360.0 / c.omega_earth_deg_day;
        for k in 1..5 {
            let t = Epoch::mjd2000(k as f64 * period);
            assert_relative_eq!(gmst_angle(t, &c), 280.4606, epsilon = 1e-8);
        }
    }

    #[test]
    fn gmst_one_day() {
        // theta0 + one day of rotation, reduced mod 360.
        let got = gmst_angle(Epoch::mjd2000(1.0), &constants());
        assert_relative_eq!(got, wrap_degrees(280.4606 + 360.9856473), epsilon = 1e-10);
        assert_relative_eq!(got, 281.4462473, epsilon = 1e-6);
    }

    #[test]
    fn chain_matrices_are_orthonormal() {
        let c = constants();
        let station = GroundStation::default();
        let chain = eci_ecef_sez_chain(Epoch::mjd2000(1234.56), &station, &c);
        for m in [chain.eci_to_ecef, chain.ecef_to_sez, chain.eci_to_sez()] {
            let should_be_eye = m.transpose() * m;
            assert!((should_be_eye - Matrix3::identity()).norm() < 1e-12);
            assert_relative_eq!(m.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zenith_at_equator_prime_meridian() {
        // Station at lat 0, lon 0 with theta = 0: zenith axis is ECI +x.
        let mut c = constants();
        c.theta0_deg = 0.0;
        let station = GroundStation {
            latitude_deg: 0.0,
            longitude_deg: 0.0,
            altitude_m: 0.0,
            ..GroundStation::default()
        };
        let chain = eci_ecef_sez_chain(Epoch::mjd2000(0.0), &station, &c);
        let zenith_eci = chain.eci_to_sez().transpose() * Vector3::new(0.0, 0.0, 1.0);
        assert!((zenith_eci - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn station_eci_matches_independent_geodetic_oracle() {
        // Independent path: WGS-84 geodetic -> ECEF formula coded from
        // scratch here, then a hand-built z-rotation by -gmst.
        let c = constants();
        let station = GroundStation {
            use_geodetic_shape: true,
            ..GroundStation::default()
        };
        let epoch = Epoch::mjd2000(2345.678);

        let lat = station.latitude_deg * DEG_TO_RAD;
        let lon = station.longitude_deg * DEG_TO_RAD;
        let a = 6378.137;
        let f = 1.0 / 298.257223563;
        let e2 = f * (2.0 - f);
        let n = a / (1.0 - e2 * lat.sin() * lat.sin()).sqrt();
        let h = 553.0e-3;
        let ecef = Vector3::new(
            (n + h) * lat.cos() * lon.cos(),
            (n + h) * lat.cos() * lon.sin(),
            (n * (1.0 - e2) + h) * lat.sin(),
        );
        let theta = -gmst_angle(epoch, &c) * DEG_TO_RAD;
        let eci = Vector3::new(
            theta.cos() * ecef.x + theta.sin() * ecef.y,
            -theta.sin() * ecef.x + theta.cos() * ecef.y,
            ecef.z,
        );

        let chain = eci_ecef_sez_chain(epoch, &station, &c);
        // < 1 m agreement.
        assert!((chain.station_eci_km - eci).norm() < 1e-3);
    }

    #[test]
    fn rth_canonical_axes() {
        let state = StateVector::new(
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Epoch::mjd2000(0.0),
        );
        let m = rth_rotation(&state).unwrap();
        assert!((m.row(0).transpose() - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((m.row(1).transpose() - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((m.row(2).transpose() - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rth_rejects_rectilinear() {
        let state = StateVector::new(
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
            Epoch::mjd2000(0.0),
        );
        assert!(rth_rotation(&state).is_err());
    }

    #[test]
    fn c3_circular_and_parabolic() {
        let c = constants();
        let mu = c.mu_moon_km3_s2;
        let rho = 5_000.0;
        let v_circ = (mu / rho).sqrt();
        let c3 = c3_energy(
            &Vector3::new(rho, 0.0, 0.0),
            &Vector3::new(0.0, v_circ, 0.0),
            mu,
        )
        .unwrap();
        assert_relative_eq!(c3, -mu / rho, epsilon = 1e-12 * mu / rho);

        let v_esc = (2.0 * mu / rho).sqrt();
        let c3 = c3_energy(
            &Vector3::new(rho, 0.0, 0.0),
            &Vector3::new(0.0, v_esc, 0.0),
            mu,
        )
        .unwrap();
        assert!(c3.abs() < 1e-12);
    }

    #[test]
    fn c3_matches_elements_oracle() {
        // Independent oracle: semi-major axis from the vis-viva elements.
        let c = constants();
        let mu = c.mu_moon_km3_s2;
        let r = Vector3::new(3_000.0, 2_000.0, -500.0);
        let v = Vector3::new(0.3, -0.9, 0.4);
        let a = 1.0 / (2.0 / r.norm() - v.norm_squared() / mu);
        let c3 = c3_energy(&r, &v, mu).unwrap();
        assert_relative_eq!(c3, -mu / a, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn rotations_preserve_norm(
            t in -5000.0..9000.0f64,
            px in -1e6..1e6f64, py in -1e6..1e6f64, pz in -1e6..1e6f64,
        ) {
            let c = constants();
            let chain = eci_ecef_sez_chain(Epoch::mjd2000(t), &GroundStation::default(), &c);
            let p = Vector3::new(px, py, pz);
            let rotated = chain.eci_to_sez() * p;
            prop_assert!((rotated.norm() - p.norm()).abs() <= 1e-9 * (1.0 + p.norm()));
        }

        #[test]
        fn rth_is_orthonormal(
            rx in -1e5..1e5f64, ry in -1e5..1e5f64, rz in -1e5..1e5f64,
            vx in -10.0..10.0f64, vy in -10.0..10.0f64, vz in -10.0..10.0f64,
        ) {
            let r = Vector3::new(rx, ry, rz);
            let v = Vector3::new(vx, vy, vz);
            prop_assume!(r.norm() > 1.0 && v.norm() > 1e-3);
            prop_assume!(r.cross(&v).norm() > 1e-6 * r.norm() * v.norm());
            let state = StateVector::new(r, v, Epoch::mjd2000(0.0));
            let m = rth_rotation(&state).unwrap();
            prop_assert!((m.transpose() * m - Matrix3::identity()).norm() < 1e-12);
            prop_assert!((m.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn c3_rotation_invariance(angle in 0.0..std::f64::consts::TAU) {
            let c = constants();
            let mu = c.mu_moon_km3_s2;
            let r = Vector3::new(4000.0, 1000.0, 2000.0);
            let v = Vector3::new(0.2, 1.1, -0.3);
            let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
            let c3a = c3_energy(&r, &v, mu).unwrap();
            let c3b = c3_energy(&(rot * r), &(rot * v), mu).unwrap();
            prop_assert!((c3a - c3b).abs() < 1e-9);
        }
    }
}
