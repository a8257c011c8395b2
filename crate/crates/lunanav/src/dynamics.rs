//! Perturbed point-mass dynamics, solar radiation pressure, numerical
//! propagation with dense output, and closed-form partials of the dynamics
//! up to third order.
//!
//! The equations of motion sum the central-body term, differential
//! (third-body) terms for the enabled perturbing bodies, and solar pressure
//! along the Sun-to-spacecraft direction with 1/r^2 flux scaling. The
//! attitude-system noise acceleration is never part of this deterministic
//! flow; the truth-simulation harness injects it through
//! [`Dynamics::propagate_with_accel_bias`].

use std::cell::RefCell;

use nalgebra::{Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::ephemeris::{BodyId, Ephemeris, EphemerisConfig};
use crate::error::{Error, Result};
use crate::frames::{Epoch, StateVector};
use crate::ode::{self, DenseSolution, EventSpec, OdeOptions, OdeSystem, Tolerances};
use crate::tensors::{Tensor3, Tensor4};

/// Propagation centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CentralBody {
    #[default]
    Earth,
    Moon,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub central: CentralBody,
    /// Sun differential gravity.
    pub enable_sun: bool,
    /// Moon differential gravity (Earth-centred propagation).
    pub enable_moon: bool,
    /// Earth differential gravity (Moon-centred propagation).
    pub enable_earth: bool,
    pub enable_srp: bool,
    /// Reflectivity coefficient, in [0, 2].
    pub cr: f64,
    /// Cross-section area, m^2.
    pub area_m2: f64,
    /// Spacecraft mass, kg. Constant per arc; impulsive manoeuvres update it
    /// between arcs through the rocket equation.
    pub mass_kg: f64,
    /// 1-sigma per-axis magnitude of the attitude-system noise acceleration,
    /// km/s^2. Consumed by the truth harness and by filter process noise,
    /// never by the deterministic flow.
    pub process_noise_accel_sigma_km_s2: f64,
    /// Specific impulse for propellant bookkeeping, s.
    pub isp_s: f64,
    pub ephemeris: EphemerisConfig,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            central: CentralBody::Earth,
            enable_sun: true,
            enable_moon: true,
            enable_earth: false,
            enable_srp: true,
            cr: 1.3,
            area_m2: 1.1,
            mass_kg: 200.0,
            process_noise_accel_sigma_km_s2: 1e-9,
            isp_s: 200.0,
            ephemeris: EphemerisConfig::default(),
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.cr) {
            return Err(Error::Config(format!("cr {} outside [0, 2]", self.cr)));
        }
        if !(self.area_m2 > 0.0) || !(self.mass_kg > 0.0) {
            return Err(Error::Config("area and mass must be positive".into()));
        }
        if self.process_noise_accel_sigma_km_s2 < 0.0 {
            return Err(Error::Config("process noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// Two-body Earth dynamics with every perturbation disabled.
    pub fn two_body_earth() -> Self {
        Self {
            enable_sun: false,
            enable_moon: false,
            enable_srp: false,
            ..Self::default()
        }
    }

    /// The same physical model re-centred on the Moon, for lunar-orbit
    /// stability and lifetime propagation.
    pub fn recentre_on_moon(&self) -> Self {
        Self {
            central: CentralBody::Moon,
            enable_earth: true,
            enable_moon: false,
            enable_sun: self.enable_sun,
            enable_srp: self.enable_srp,
            ..self.clone()
        }
    }
}

/// A gravitating point source as seen from the propagation centre.
struct PointSource {
    name: &'static str,
    /// Source position relative to the centre, km (zero for the central body).
    offset_km: Vector3<f64>,
    /// Signed strength: the direct acceleration is `-mu (r - offset)/|..|^3`.
    /// Gravity uses `mu > 0`; solar pressure enters as a negative `mu`.
    mu: f64,
    /// Whether the state-independent indirect term `-mu offset/|offset|^3`
    /// applies (differential gravity of a third body).
    indirect: bool,
}

/// Resolved dynamics model: configuration plus ephemeris and constants.
#[derive(Debug, Clone)]
pub struct Dynamics {
    pub config: DynamicsConfig,
    pub constants: Constants,
    ephemeris: Ephemeris,
}

impl Dynamics {
    pub fn new(config: DynamicsConfig, constants: Constants) -> Result<Self> {
        config.validate()?;
        constants.validate()?;
        let ephemeris = Ephemeris::new(config.ephemeris.clone(), &constants);
        Ok(Self {
            config,
            constants,
            ephemeris,
        })
    }

    pub fn ephemeris(&self) -> &Ephemeris {
        &self.ephemeris
    }

    /// Effective solar-pressure strength, km^3/s^2 (negative `mu` form).
    fn srp_mu(&self) -> f64 {
        let c = &self.constants;
        let accel_1au_km_s2 = self.config.cr
            * c.srp_pressure_1au_n_m2
            * self.config.area_m2
            / self.config.mass_kg
            * 1e-3;
        -(accel_1au_km_s2 * c.au_km * c.au_km)
    }

    fn sources(&self, epoch: Epoch) -> Vec<PointSource> {
        let c = &self.constants;
        let sample = self.ephemeris.sample(epoch);
        let mut list = Vec::with_capacity(4);
        let (central_mu, central_name) = match self.config.central {
            CentralBody::Earth => (c.mu_earth_km3_s2, "earth"),
            CentralBody::Moon => (c.mu_moon_km3_s2, "moon"),
        };
        list.push(PointSource {
            name: central_name,
            offset_km: Vector3::zeros(),
            mu: central_mu,
            indirect: false,
        });
        // Perturbing-body positions relative to the centre.
        let (sun_rel, moon_rel, earth_rel) = match self.config.central {
            CentralBody::Earth => (
                sample.sun_from_earth_km,
                sample.moon_from_earth_km,
                Vector3::zeros(),
            ),
            CentralBody::Moon => (
                sample.sun_from_earth_km - sample.moon_from_earth_km,
                Vector3::zeros(),
                -sample.moon_from_earth_km,
            ),
        };
        if self.config.enable_sun {
            list.push(PointSource {
                name: "sun",
                offset_km: sun_rel,
                mu: c.mu_sun_km3_s2,
                indirect: true,
            });
        }
        if self.config.enable_moon && self.config.central == CentralBody::Earth {
            list.push(PointSource {
                name: "moon",
                offset_km: moon_rel,
                mu: c.mu_moon_km3_s2,
                indirect: true,
            });
        }
        if self.config.enable_earth && self.config.central == CentralBody::Moon {
            list.push(PointSource {
                name: "earth",
                offset_km: earth_rel,
                mu: c.mu_earth_km3_s2,
                indirect: true,
            });
        }
        if self.config.enable_srp {
            list.push(PointSource {
                name: "srp",
                offset_km: sun_rel,
                mu: self.srp_mu(),
                indirect: false,
            });
        }
        list
    }

    /// Total modeled acceleration at `(epoch, r)` in the centre's inertial
    /// frame, km/s^2. The attitude noise term is not included here.
    pub fn acceleration(&self, epoch: Epoch, r_km: &Vector3<f64>) -> Result<Vector3<f64>> {
        let mut accel = Vector3::zeros();
        for src in self.sources(epoch) {
            let u = r_km - src.offset_km;
            let d = u.norm();
            if d < 1e-3 {
                return Err(Error::Singularity {
                    body: src.name,
                    radius_km: d,
                });
            }
            accel -= src.mu * u / (d * d * d);
            if src.indirect {
                let s = src.offset_km.norm();
                accel -= src.mu * src.offset_km / (s * s * s);
            }
        }
        Ok(accel)
    }

    /// Closed-form partials of the acceleration with respect to position:
    /// the 3x3 gradient and optionally the symmetric second and third
    /// derivative tensors.
    #[allow(clippy::type_complexity)]
    pub fn accel_position_partials(
        &self,
        epoch: Epoch,
        r_km: &Vector3<f64>,
        order: u8,
    ) -> Result<(
        Matrix3<f64>,
        Option<[[[f64; 3]; 3]; 3]>,
        Option<[[[[f64; 3]; 3]; 3]; 3]>,
    )> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!(
                "partials order must be 1, 2 or 3, got {order}"
            )));
        }
        let mut g1 = Matrix3::zeros();
        let mut g2 = [[[0.0; 3]; 3]; 3];
        let mut g3 = [[[[0.0; 3]; 3]; 3]; 3];
        let eye = |i: usize, j: usize| -> f64 {
            if i == j {
                1.0
            } else {
                0.0
            }
        };
        for src in self.sources(epoch) {
            let u = r_km - src.offset_km;
            let d = u.norm();
            if d < 1e-3 {
                return Err(Error::Singularity {
                    body: src.name,
                    radius_km: d,
                });
            }
            let inv3 = d.powi(-3);
            let inv5 = d.powi(-5);
            let inv7 = d.powi(-7);
            let inv9 = d.powi(-9);
            for i in 0..3 {
                for a in 0..3 {
                    g1[(i, a)] -= src.mu * (eye(i, a) * inv3 - 3.0 * u[i] * u[a] * inv5);
                }
            }
            if order >= 2 {
                for i in 0..3 {
                    for a in 0..3 {
                        for b in 0..3 {
                            let t5 = eye(i, a) * u[b] + eye(i, b) * u[a] + eye(a, b) * u[i];
                            g2[i][a][b] -=
                                src.mu * (-3.0 * t5 * inv5 + 15.0 * u[i] * u[a] * u[b] * inv7);
                        }
                    }
                }
            }
            if order >= 3 {
                for i in 0..3 {
                    for a in 0..3 {
                        for b in 0..3 {
                            for cc in 0..3 {
                                let t5 = eye(i, a) * eye(b, cc)
                                    + eye(i, b) * eye(a, cc)
                                    + eye(a, b) * eye(i, cc);
                                let t7 = eye(i, a) * u[b] * u[cc]
                                    + eye(i, b) * u[a] * u[cc]
                                    + eye(i, cc) * u[a] * u[b]
                                    + eye(a, b) * u[i] * u[cc]
                                    + eye(a, cc) * u[i] * u[b]
                                    + eye(b, cc) * u[i] * u[a];
                                g3[i][a][b][cc] -= src.mu
                                    * (-3.0 * t5 * inv5 + 15.0 * t7 * inv7
                                        - 105.0 * u[i] * u[a] * u[b] * u[cc] * inv9);
                            }
                        }
                    }
                }
            }
        }
        Ok((
            g1,
            (order >= 2).then_some(g2),
            (order >= 3).then_some(g3),
        ))
    }

    /// Partials of the full drift f = [v; a(r, t)] embedded in the
    /// 6-dimensional state space.
    pub fn partials(&self, epoch: Epoch, r_km: &Vector3<f64>, order: u8) -> Result<DynamicsPartials> {
        let (g1, g2, g3) = self.accel_position_partials(epoch, r_km, order)?;
        let mut jacobian = Matrix6::zeros();
        for i in 0..3 {
            jacobian[(i, i + 3)] = 1.0;
            for a in 0..3 {
                jacobian[(i + 3, a)] = g1[(i, a)];
            }
        }
        let second = g2.map(|g| {
            let mut t = Tensor3::zeros();
            for i in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        t.set(i + 3, a, b, g[i][a][b]);
                    }
                }
            }
            Box::new(t)
        });
        let third = g3.map(|g| {
            let mut t = Tensor4::zeros();
            for i in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        for c in 0..3 {
                            t.set(i + 3, a, b, c, g[i][a][b][c]);
                        }
                    }
                }
            }
            Box::new(t)
        });
        Ok(DynamicsPartials {
            order,
            jacobian,
            second,
            third,
        })
    }

    /// Adaptive propagation of the deterministic flow to `t_target` (either
    /// direction). Dense output is queryable at any interior epoch.
    pub fn propagate(
        &self,
        state: &StateVector,
        t_target: Epoch,
        tol: Tolerances,
    ) -> Result<Trajectory> {
        self.propagate_with_accel_bias(state, t_target, Vector3::zeros(), tol)
    }

    /// Propagation with a constant extra acceleration, km/s^2. The truth
    /// harness uses this to inject piecewise-constant attitude noise.
    pub fn propagate_with_accel_bias(
        &self,
        state: &StateVector,
        t_target: Epoch,
        bias_km_s2: Vector3<f64>,
        tol: Tolerances,
    ) -> Result<Trajectory> {
        let system = DynamicsOde {
            dynamics: self,
            bias_km_s2,
            fault: RefCell::new(None),
        };
        let y0 = [
            state.position_km.x,
            state.position_km.y,
            state.position_km.z,
            state.velocity_km_s.x,
            state.velocity_km_s.y,
            state.velocity_km_s.z,
        ];
        let options = OdeOptions::with_tol(tol);
        let result = ode::integrate(
            &system,
            state.epoch.seconds(),
            &y0,
            t_target.seconds(),
            &options,
        );
        let dense = match result {
            Ok(d) => d,
            Err(e) => return Err(system.fault.into_inner().unwrap_or(e)),
        };
        Ok(Trajectory { dense })
    }

    /// Propagation that stops at the first sign change of any event
    /// function g(epoch, state).
    pub fn propagate_with_events(
        &self,
        state: &StateVector,
        t_target: Epoch,
        tol: Tolerances,
        events: &[&dyn Fn(Epoch, &StateVector) -> f64],
        t_tol_sec: f64,
    ) -> Result<(Trajectory, Option<usize>)> {
        let system = DynamicsOde {
            dynamics: self,
            bias_km_s2: Vector3::zeros(),
            fault: RefCell::new(None),
        };
        let y0 = [
            state.position_km.x,
            state.position_km.y,
            state.position_km.z,
            state.velocity_km_s.x,
            state.velocity_km_s.y,
            state.velocity_km_s.z,
        ];
        let wrapped: Vec<Box<dyn Fn(f64, &[f64]) -> f64>> = events
            .iter()
            .map(|g| {
                let g = *g;
                Box::new(move |t_sec: f64, y: &[f64]| {
                    let sv = StateVector::new(
                        Vector3::new(y[0], y[1], y[2]),
                        Vector3::new(y[3], y[4], y[5]),
                        Epoch::from_seconds(t_sec),
                    );
                    g(sv.epoch, &sv)
                }) as Box<dyn Fn(f64, &[f64]) -> f64>
            })
            .collect();
        let specs: Vec<EventSpec<'_>> = wrapped
            .iter()
            .map(|g| EventSpec {
                g: g.as_ref(),
                t_tol_sec,
            })
            .collect();
        let options = OdeOptions::with_tol(tol);
        let (dense, hit) = match ode::integrate_with_events(
            &system,
            state.epoch.seconds(),
            &y0,
            t_target.seconds(),
            &options,
            &specs,
        ) {
            Ok(ok) => ok,
            Err(e) => return Err(system.fault.into_inner().unwrap_or(e)),
        };
        Ok((Trajectory { dense }, hit.map(|h| h.event_index)))
    }

    /// Moon-relative view of an ECI state (or the inverse).
    pub fn eci_to_moon_relative(&self, state: &StateVector) -> StateVector {
        let (r_moon, v_moon) = self.ephemeris.body_state(state.epoch, BodyId::Moon);
        StateVector::new(
            state.position_km - r_moon,
            state.velocity_km_s - v_moon,
            state.epoch,
        )
    }

    pub fn moon_relative_to_eci(&self, state: &StateVector) -> StateVector {
        let (r_moon, v_moon) = self.ephemeris.body_state(state.epoch, BodyId::Moon);
        StateVector::new(
            state.position_km + r_moon,
            state.velocity_km_s + v_moon,
            state.epoch,
        )
    }

    /// Spacecraft distance from the Moon centre, km, for an ECI position.
    pub fn moon_distance_km(&self, epoch: Epoch, r_eci_km: &Vector3<f64>) -> f64 {
        (r_eci_km - self.ephemeris.body_position(epoch, BodyId::Moon)).norm()
    }
}

/// Order-1/2/3 partials of the drift at one (epoch, state).
#[derive(Debug, Clone)]
pub struct DynamicsPartials {
    pub order: u8,
    /// f^{i,a}: the 6x6 Jacobian with the [0 I; G 0] block structure.
    pub jacobian: Matrix6<f64>,
    /// f^{i,ab}, zero outside the acceleration-by-position block.
    pub second: Option<Box<Tensor3>>,
    /// f^{i,abc}.
    pub third: Option<Box<Tensor4>>,
}

struct DynamicsOde<'a> {
    dynamics: &'a Dynamics,
    bias_km_s2: Vector3<f64>,
    fault: RefCell<Option<Error>>,
}

impl OdeSystem for DynamicsOde<'_> {
    fn dim(&self) -> usize {
        6
    }

    fn eval(&self, t_sec: f64, y: &[f64], dydt: &mut [f64]) {
        let epoch = Epoch::from_seconds(t_sec);
        let r = Vector3::new(y[0], y[1], y[2]);
        dydt[0] = y[3];
        dydt[1] = y[4];
        dydt[2] = y[5];
        match self.dynamics.acceleration(epoch, &r) {
            Ok(a) => {
                dydt[3] = a.x + self.bias_km_s2.x;
                dydt[4] = a.y + self.bias_km_s2.y;
                dydt[5] = a.z + self.bias_km_s2.z;
            }
            Err(e) => {
                // Poison the step; the integrator surfaces the stored fault.
                self.fault.replace(Some(e));
                dydt[3] = f64::NAN;
                dydt[4] = f64::NAN;
                dydt[5] = f64::NAN;
            }
        }
    }
}

/// Integrated trajectory with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dense: DenseSolution,
}

impl Trajectory {
    pub fn start_epoch(&self) -> Epoch {
        Epoch::from_seconds(self.dense.t_start())
    }

    pub fn end_epoch(&self) -> Epoch {
        Epoch::from_seconds(self.dense.t_end())
    }

    pub fn covers(&self, epoch: Epoch) -> bool {
        let t = epoch.seconds();
        let (lo, hi) = if self.dense.t_start() <= self.dense.t_end() {
            (self.dense.t_start(), self.dense.t_end())
        } else {
            (self.dense.t_end(), self.dense.t_start())
        };
        t >= lo - 1e-6 && t <= hi + 1e-6
    }

    /// Interpolated state at an interior epoch; exact at integration nodes.
    pub fn state_at(&self, epoch: Epoch) -> Result<StateVector> {
        let mut out = [0.0; 6];
        self.dense.sample(epoch.seconds(), &mut out)?;
        Ok(StateVector::new(
            Vector3::new(out[0], out[1], out[2]),
            Vector3::new(out[3], out[4], out[5]),
            epoch,
        ))
    }

    pub fn final_state(&self) -> StateVector {
        let y = self.dense.final_state();
        StateVector::new(
            Vector3::new(y[0], y[1], y[2]),
            Vector3::new(y[3], y[4], y[5]),
            self.end_epoch(),
        )
    }

    /// Accepted integration nodes in time order.
    pub fn nodes(&self) -> Vec<(Epoch, StateVector)> {
        self.dense
            .nodes()
            .map(|(t, y)| {
                let epoch = Epoch::from_seconds(t);
                (
                    epoch,
                    StateVector::new(
                        Vector3::new(y[0], y[1], y[2]),
                        Vector3::new(y[3], y[4], y[5]),
                        epoch,
                    ),
                )
            })
            .collect()
    }
}
