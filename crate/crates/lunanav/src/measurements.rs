//! Topocentric observables, measurement noise, the measurement Jacobian and
//! pass scheduling.
//!
//! Measurement vector convention, used for observation records, noise
//! covariances and Jacobian rows alike:
//! `(range km, azimuth deg, elevation deg, range-rate km/s)`.
//! Azimuth is measured from North toward East in [0, 360); the zenith
//! direction (undefined azimuth) reports A = 0 by convention. The range-rate
//! includes the station's rotational velocity.

use nalgebra::{Matrix4, Vector3, Vector4};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::frames::{
    eci_ecef_sez_chain, wrap_degrees, wrap_degrees_symmetric, Epoch, GroundStation, StateVector,
    RAD_TO_DEG,
};

/// One tracking observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub epoch: Epoch,
    pub range_km: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub range_rate_km_s: f64,
    pub station: StationId,
}

/// Index into the scenario's station list (a single station in the shipped
/// configuration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct StationId(pub u32);

impl Observation {
    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(
            self.range_km,
            self.azimuth_deg,
            self.elevation_deg,
            self.range_rate_km_s,
        )
    }
}

/// Difference of two measurement vectors with the azimuth component wrapped
/// to (-180, 180]. Innovations and sigma-point deviations both use this.
pub fn measurement_delta(y: &Vector4<f64>, reference: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(
        y[0] - reference[0],
        wrap_degrees_symmetric(y[1] - reference[1]),
        y[2] - reference[2],
        y[3] - reference[3],
    )
}

/// 1-sigma measurement errors in their customary units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub sigma_range_m: f64,
    pub sigma_range_rate_mm_s: f64,
    pub sigma_angles_mdeg: f64,
}

impl Default for NoiseModel {
    /// Baseline errors adopted for every navigation analysis: 15 m range,
    /// 0.5 mm/s range-rate, 20 mdeg angles.
    fn default() -> Self {
        Self {
            sigma_range_m: 15.0,
            sigma_range_rate_mm_s: 0.5,
            sigma_angles_mdeg: 20.0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_range_m < 0.0
            || self.sigma_range_rate_mm_s < 0.0
            || self.sigma_angles_mdeg < 0.0
        {
            return Err(Error::Config("noise sigmas must be >= 0".into()));
        }
        Ok(())
    }

    /// Per-component sigmas in measurement-vector units
    /// (km, deg, deg, km/s).
    pub fn sigmas(&self) -> Vector4<f64> {
        Vector4::new(
            self.sigma_range_m * 1e-3,
            self.sigma_angles_mdeg * 1e-3,
            self.sigma_angles_mdeg * 1e-3,
            self.sigma_range_rate_mm_s * 1e-6,
        )
    }

    /// Diagonal observation error covariance R.
    pub fn r_matrix(&self) -> Matrix4<f64> {
        let s = self.sigmas();
        Matrix4::from_diagonal(&s.component_mul(&s))
    }
}

/// Noise-free observation of a state from a station.
pub fn observe(
    state: &StateVector,
    station: &GroundStation,
    station_id: StationId,
    constants: &Constants,
) -> Result<Observation> {
    let chain = eci_ecef_sez_chain(state.epoch, station, constants);
    let t = chain.eci_to_sez();
    let p_eci = state.position_km - chain.station_eci_km;
    let p = t * p_eci;
    let pdot_eci = state.velocity_km_s - chain.station_velocity_eci_km_s(constants);
    let pdot = t * pdot_eci;

    let rho = p.norm();
    if rho == 0.0 {
        return Err(Error::DegenerateGeometry(
            "spacecraft coincides with the station".into(),
        ));
    }
    let elevation = (p.z / rho).asin() * RAD_TO_DEG;
    let horizontal = (p.x * p.x + p.y * p.y).sqrt();
    // Zenith tie-break: azimuth defined as 0.
    let azimuth = if horizontal < 1e-12 * rho {
        0.0
    } else {
        wrap_degrees(p.y.atan2(-p.x) * RAD_TO_DEG)
    };
    let range_rate = pdot.dot(&p) / rho;

    Ok(Observation {
        epoch: state.epoch,
        range_km: rho,
        azimuth_deg: azimuth,
        elevation_deg: elevation,
        range_rate_km_s: range_rate,
        station: station_id,
    })
}

/// Perturb each component with an independent zero-mean Gaussian of its own
/// sigma. Azimuth is re-wrapped to [0, 360); elevation stays in [-90, 90].
pub fn apply_noise<R: Rng + ?Sized>(
    obs: &Observation,
    noise: &NoiseModel,
    rng: &mut R,
) -> Observation {
    let s = noise.sigmas();
    let mut draw = |sigma: f64| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    };
    let range = obs.range_km + draw(s[0]);
    let azimuth = wrap_degrees(obs.azimuth_deg + draw(s[1]));
    let elevation = (obs.elevation_deg + draw(s[2])).clamp(-90.0, 90.0);
    let range_rate = obs.range_rate_km_s + draw(s[3]);
    Observation {
        range_km: range,
        azimuth_deg: azimuth,
        elevation_deg: elevation,
        range_rate_km_s: range_rate,
        ..*obs
    }
}

/// Jacobian of the measurement vector with respect to the ECI state,
/// rows (range, azimuth, elevation, range-rate) by columns (r, v).
/// Angle rows are in degrees per km and fail near the zenith where azimuth
/// is undefined.
pub fn measurement_jacobian(
    state: &StateVector,
    station: &GroundStation,
    constants: &Constants,
) -> Result<nalgebra::SMatrix<f64, 4, 6>> {
    let chain = eci_ecef_sez_chain(state.epoch, station, constants);
    let t = chain.eci_to_sez();
    let p = t * (state.position_km - chain.station_eci_km);
    let pdot = t * (state.velocity_km_s - chain.station_velocity_eci_km_s(constants));

    let rho = p.norm();
    if rho == 0.0 {
        return Err(Error::DegenerateGeometry(
            "measurement Jacobian undefined at zero range".into(),
        ));
    }
    let h2 = p.x * p.x + p.y * p.y;
    if h2 < 1e-18 * rho * rho {
        return Err(Error::DegenerateGeometry(
            "azimuth row singular at the zenith".into(),
        ));
    }
    let p_hat = p / rho;

    // Gradients with respect to the SEZ relative position/velocity.
    let d_rho_dp = p_hat;
    let d_az_dp = Vector3::new(p.y / h2, -p.x / h2, 0.0) * RAD_TO_DEG;
    let cos_el = h2.sqrt() / rho;
    let d_el_dp = (Vector3::new(0.0, 0.0, 1.0) - p_hat * p_hat.z) / (rho * cos_el) * RAD_TO_DEG;
    let rho_dot = pdot.dot(&p) / rho;
    let d_rr_dp = (pdot - p_hat * rho_dot) / rho;
    let d_rr_dpdot = p_hat;

    // Chain through p = T (r - r_site), pdot = T (v - v_site): left-multiply
    // each SEZ gradient by T^T for the r / v blocks.
    let mut jac = nalgebra::SMatrix::<f64, 4, 6>::zeros();
    let rows_pos = [d_rho_dp, d_az_dp, d_el_dp, d_rr_dp];
    for (row, grad) in rows_pos.iter().enumerate() {
        let g = t.transpose() * grad;
        for col in 0..3 {
            jac[(row, col)] = g[col];
        }
    }
    let g = t.transpose() * d_rr_dpdot;
    for col in 0..3 {
        jac[(3, col + 3)] = g[col];
    }
    Ok(jac)
}

/// Epochs on the cadence grid where the trajectory is visible from the
/// station (elevation at or above the station minimum).
pub fn pass_schedule(
    trajectory: &Trajectory,
    station: &GroundStation,
    constants: &Constants,
    cadence_s: f64,
) -> Result<Vec<Epoch>> {
    if !(cadence_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cadence must be positive, got {cadence_s}"
        )));
    }
    let t0 = trajectory.start_epoch();
    let t1 = trajectory.end_epoch();
    if t1.days() < t0.days() {
        return Err(Error::InvalidArgument(
            "pass scheduling expects a forward trajectory".into(),
        ));
    }
    let span_s = (t1.days() - t0.days()) * 86_400.0;
    let steps = (span_s / cadence_s).floor() as usize;
    let mut out = Vec::new();
    for k in 0..=steps {
        let epoch = t0.add_seconds(k as f64 * cadence_s);
        let state = trajectory.state_at(epoch)?;
        let obs = observe(&state, station, StationId(0), constants)?;
        if obs.elevation_deg >= station.min_elevation_deg {
            out.push(epoch);
        }
    }
    Ok(out)
}
