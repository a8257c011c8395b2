//! Navigation toolkit for weak-stability-boundary Earth-Moon transfers.
//!
//! The crate covers the full loop of flying such a transfer on the ground
//! segment side: perturbed four-body propagation with dense output,
//! ground-station tracking simulation, three interchangeable Kalman-family
//! estimators (EKF, UKF and a state-transition-tensor filter), lunar capture
//! corridor construction, correction-manoeuvre planning, weak-capture
//! lifetime extension, and seeded Monte Carlo dispersion analysis.
//!
//! Units everywhere: km, km/s, kg, degrees; epochs in days since J2000
//! (MJD2000).

pub mod constants;
pub mod corridor;
pub mod dynamics;
pub mod ephemeris;
pub mod error;
pub mod filters;
pub mod frames;
pub mod guidance;
pub mod measurements;
pub mod montecarlo;
pub mod ode;
pub mod optimize;
pub mod report;
pub mod scenario;
pub mod stt;
pub mod tensors;

pub use constants::Constants;
pub use error::{Error, Result};
pub use frames::{Epoch, GroundStation, StateVector};
