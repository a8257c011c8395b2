//! Embedded Dormand-Prince 5(4) integrator with PI step control, dense
//! output and event location.
//!
//! The integrator is dimension-generic (slices of `f64`) because the same
//! kernel drives 6-state propagation, 42-equation variational systems and the
//! 258/1554-equation tensor systems. Time is absolute seconds (epoch days
//! times 86400); integration backward in time is supported by passing
//! `t_end < t0`.

use crate::error::{Error, Result};

/// Right-hand side of an autonomous-in-form ODE y' = f(t, y).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval(&self, t_sec: f64, y: &[f64], dydt: &mut [f64]);
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.1)(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        // Matches the accuracy used for all trajectory work in this crate.
        Self {
            rel: 1e-9,
            abs: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub tol: Tolerances,
    /// Initial step, s. Chosen automatically when absent.
    pub h_init: Option<f64>,
    /// Step magnitude cap, s.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            h_init: None,
            h_max: None,
            max_steps: 4_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

// Dormand-Prince 5(4) Butcher tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-minus-4th order error weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step's quartic interpolant coefficients.
#[derive(Debug, Clone)]
struct DenseSegment {
    t0: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseSegment {
    fn sample(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        for i in 0..out.len() {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
    }
}

/// Dense solution over an integration span. Sampling at an accepted node
/// reproduces the node state exactly (the interpolant is anchored there).
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    t_start: f64,
    t_end: f64,
    /// Accepted node times, in integration order.
    node_times: Vec<f64>,
    /// Accepted node states.
    node_states: Vec<Vec<f64>>,
    segments: Vec<DenseSegment>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.node_times
            .iter()
            .copied()
            .zip(self.node_states.iter().map(|s| s.as_slice()))
    }

    pub fn final_state(&self) -> &[f64] {
        self.node_states.last().expect("at least initial node")
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        };
        // Tolerate sub-microsecond round-off at the span edges.
        t >= lo - 1e-6 && t <= hi + 1e-6
    }

    /// Interpolate the solution at `t` (absolute seconds).
    pub fn sample(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if !self.contains(t) {
            return Err(Error::OutOfSpan {
                requested: t / 86_400.0,
                start: self.t_start / 86_400.0,
                end: self.t_end / 86_400.0,
            });
        }
        if self.segments.is_empty() {
            out.copy_from_slice(&self.node_states[0]);
            return Ok(());
        }
        let idx = self.locate_segment(t);
        // Exact node hits reproduce the node state bit-for-bit.
        if t == self.node_times[idx] {
            out.copy_from_slice(&self.node_states[idx]);
            return Ok(());
        }
        if t == self.node_times[idx + 1] {
            out.copy_from_slice(&self.node_states[idx + 1]);
            return Ok(());
        }
        self.segments[idx].sample(t, out);
        Ok(())
    }

    fn locate_segment(&self, t: f64) -> usize {
        let forward = self.t_end >= self.t_start;
        // Binary search over segment start times.
        let mut lo = 0usize;
        let mut hi = self.segments.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let seg = &self.segments[mid];
            let seg_end = seg.t0 + seg.h;
            let after = if forward { t > seg_end } else { t < seg_end };
            if after {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Terminal event: integration stops where `g` crosses zero.
pub struct EventSpec<'a> {
    pub g: &'a dyn Fn(f64, &[f64]) -> f64,
    /// Root-localization tolerance on t, s.
    pub t_tol_sec: f64,
}

#[derive(Debug, Clone)]
pub struct EventHit {
    pub t_sec: f64,
    pub state: Vec<f64>,
    pub event_index: usize,
}

pub fn integrate(
    system: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    options: &OdeOptions,
) -> Result<DenseSolution> {
    integrate_with_events(system, t0, y0, t_end, options, &[]).map(|(sol, _)| sol)
}

/// Integrate, stopping early at the first zero crossing of any event
/// function. The dense solution then ends at the localized event time.
pub fn integrate_with_events(
    system: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    options: &OdeOptions,
    events: &[EventSpec<'_>],
) -> Result<(DenseSolution, Option<EventHit>)> {
    let n = system.dim();
    assert_eq!(y0.len(), n, "initial state dimension mismatch");
    let tol = options.tol;
    if !(tol.rel > 0.0 && tol.abs > 0.0) {
        return Err(Error::InvalidArgument(
            "tolerances must be strictly positive".into(),
        ));
    }

    let mut solution = DenseSolution {
        dim: n,
        t_start: t0,
        t_end: t0,
        node_times: vec![t0],
        node_states: vec![y0.to_vec()],
        segments: Vec::new(),
    };

    if t_end == t0 {
        return Ok((solution, None));
    }
    let direction = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let h_max = options.h_max.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    system.eval(t, &y, &mut k[0]);
    let mut event_prev: Vec<f64> = events.iter().map(|e| (e.g)(t, &y)).collect();

    let mut h = match options.h_init {
        Some(h) => h.abs().min(h_max) * direction,
        None => initial_step(system, t, &y, &k[0], direction, tol, h_max),
    };

    let mut y_next = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let mut err_old: f64 = 1e-4;
    let safety = 0.9;
    let beta = 0.04;
    let expo = 0.2 - beta * 0.75;

    for _step in 0..options.max_steps {
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepSizeUnderflow { t_sec: t, h_sec: h });
        }
        // Do not overshoot the end point.
        if (t + h - t_end) * direction > 0.0 {
            h = t_end - t;
        }

        // Stages 2..6.
        for i in 0..n {
            y_stage[i] = y[i] + h * A21 * k[0][i];
        }
        system.eval(t + C[1] * h, &y_stage, &mut k[1]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        system.eval(t + C[2] * h, &y_stage, &mut k[2]);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        system.eval(t + C[3] * h, &y_stage, &mut k[3]);
        for i in 0..n {
            y_stage[i] =
                y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        system.eval(t + C[4] * h, &y_stage, &mut k[4]);
        for i in 0..n {
            y_stage[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        system.eval(t + C[5] * h, &y_stage, &mut k[5]);
        // 5th-order solution (also stage 7 position, FSAL).
        for i in 0..n {
            y_next[i] = y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        system.eval(t + h, &y_next, &mut k[6]);

        // Error estimate against the embedded 4th-order solution.
        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let scale = tol.abs + tol.rel * y[i].abs().max(y_next[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / n as f64).sqrt().max(1e-20);

        if err <= 1.0 {
            // Accept: build the dense-output interpolant for this step.
            let mut rcont = [
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
            ];
            for i in 0..n {
                let ydiff = y_next[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                rcont[4][i] = h
                    * (D1 * k[0][i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let segment = DenseSegment { t0: t, h, rcont };

            // Event check across the accepted step.
            let t_new = t + h;
            for (ei, ev) in events.iter().enumerate() {
                let g_new = (ev.g)(t_new, &y_next);
                let g_old = event_prev[ei];
                if g_old == 0.0 {
                    event_prev[ei] = g_new;
                    continue;
                }
                if g_old * g_new <= 0.0 && g_new != g_old {
                    let hit =
                        locate_event(&segment, ev, t, t_new, g_old, g_new, n)?;
                    solution.segments.push(segment);
                    solution.node_times.push(hit.t_sec);
                    solution.node_states.push(hit.state.clone());
                    solution.t_end = hit.t_sec;
                    return Ok((solution, Some(EventHit { event_index: ei, ..hit })));
                }
                event_prev[ei] = g_new;
            }

            solution.segments.push(segment);
            t = t_new;
            std::mem::swap(&mut y, &mut y_next);
            k.swap(0, 6); // FSAL
            solution.node_times.push(t);
            solution.node_states.push(y.clone());
            solution.t_end = t;

            if (t - t_end) * direction >= 0.0 {
                return Ok((solution, None));
            }

            let fac = (err.powf(expo) / err_old.powf(beta) / safety).max(0.2).min(5.0);
            h = (h / fac).clamp(-h_max, h_max);
            if h == 0.0 {
                h = 1e-12 * direction;
            }
            err_old = err.max(1e-4);
        } else {
            // Reject and shrink (at most by a factor of 10).
            let fac = (err.powf(0.2) / safety).min(10.0);
            h /= fac;
            if h.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::StepSizeUnderflow { t_sec: t, h_sec: h });
            }
        }
    }
    Err(Error::MaxStepsExceeded(options.max_steps))
}

fn locate_event(
    segment: &DenseSegment,
    ev: &EventSpec<'_>,
    t_lo0: f64,
    t_hi0: f64,
    g_lo0: f64,
    g_hi0: f64,
    n: usize,
) -> Result<EventHit> {
    let mut t_lo = t_lo0;
    let mut t_hi = t_hi0;
    let mut g_lo = g_lo0;
    let mut state = vec![0.0; n];
    let _ = g_hi0;
    for _ in 0..200 {
        if (t_hi - t_lo).abs() <= ev.t_tol_sec {
            break;
        }
        let t_mid = 0.5 * (t_lo + t_hi);
        segment.sample(t_mid, &mut state);
        let g_mid = (ev.g)(t_mid, &state);
        if g_lo * g_mid <= 0.0 {
            t_hi = t_mid;
        } else {
            t_lo = t_mid;
            g_lo = g_mid;
        }
    }
    segment.sample(t_hi, &mut state);
    Ok(EventHit {
        t_sec: t_hi,
        state,
        event_index: 0,
    })
}

/// Hairer-style automatic initial step selection.
fn initial_step(
    system: &dyn OdeSystem,
    t: f64,
    y: &[f64],
    f0: &[f64],
    direction: f64,
    tol: Tolerances,
    h_max: f64,
) -> f64 {
    let n = y.len();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..n {
        let sk = tol.abs + tol.rel * y[i].abs();
        d0 += (y[i] / sk) * (y[i] / sk);
        d1 += (f0[i] / sk) * (f0[i] / sk);
    }
    d0 = (d0 / n as f64).sqrt();
    d1 = (d1 / n as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(h_max);

    // One Euler probe to estimate the second derivative scale.
    let mut y1 = vec![0.0; n];
    for i in 0..n {
        y1[i] = y[i] + direction * h0 * f0[i];
    }
    let mut f1 = vec![0.0; n];
    system.eval(t + direction * h0, &y1, &mut f1);
    let mut d2 = 0.0;
    for i in 0..n {
        let sk = tol.abs + tol.rel * y[i].abs();
        let df = (f1[i] - f0[i]) / sk;
        d2 += df * df;
    }
    d2 = (d2 / n as f64).sqrt() / h0;

    let max_d = d1.max(d2);
    let h1 = if max_d <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / max_d).powf(0.2)
    };
    (100.0 * h0).min(h1).min(h_max) * direction
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Exponential;
    impl OdeSystem for Exponential {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
            dydt[0] = y[0];
        }
    }

    struct Harmonic;
    impl OdeSystem for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
            dydt[0] = y[1];
            dydt[1] = -y[0];
        }
    }

    #[test]
    fn exponential_growth() {
        let opts = OdeOptions::with_tol(Tolerances::new(1e-12, 1e-12));
        let sol = integrate(&Exponential, 0.0, &[1.0], 2.0, &opts).unwrap();
        assert_relative_eq!(sol.final_state()[0], 2.0f64.exp(), max_relative = 1e-10);
    }

    #[test]
    fn harmonic_oscillator_round_trip() {
        let opts = OdeOptions::with_tol(Tolerances::new(1e-12, 1e-12));
        let tau = std::f64::consts::TAU;
        let sol = integrate(&Harmonic, 0.0, &[1.0, 0.0], 10.0 * tau, &opts).unwrap();
        assert!((sol.final_state()[0] - 1.0).abs() < 1e-8);
        assert!(sol.final_state()[1].abs() < 1e-8);
    }

    #[test]
    fn dense_output_matches_analytic() {
        let opts = OdeOptions::with_tol(Tolerances::new(1e-11, 1e-11));
        let sol = integrate(&Harmonic, 0.0, &[1.0, 0.0], 6.0, &opts).unwrap();
        let mut out = [0.0; 2];
        for k in 0..120 {
            let t = 0.05 * k as f64;
            sol.sample(t, &mut out).unwrap();
            assert!(
                (out[0] - t.cos()).abs() < 1e-9,
                "t={t}: {} vs {}",
                out[0],
                t.cos()
            );
        }
    }

    #[test]
    fn dense_output_exact_at_nodes() {
        let opts = OdeOptions::default();
        let sol = integrate(&Harmonic, 0.0, &[1.0, 0.0], 3.0, &opts).unwrap();
        let mut out = [0.0; 2];
        let nodes: Vec<(f64, Vec<f64>)> =
            sol.nodes().map(|(t, s)| (t, s.to_vec())).collect();
        for (t, state) in nodes {
            sol.sample(t, &mut out).unwrap();
            assert_eq!(out[0], state[0]);
            assert_eq!(out[1], state[1]);
        }
    }

    #[test]
    fn backward_integration() {
        let opts = OdeOptions::with_tol(Tolerances::new(1e-12, 1e-12));
        let sol = integrate(&Exponential, 0.0, &[1.0], -1.0, &opts).unwrap();
        assert_relative_eq!(sol.final_state()[0], (-1.0f64).exp(), max_relative = 1e-10);
        let mut out = [0.0];
        sol.sample(-0.5, &mut out).unwrap();
        assert_relative_eq!(out[0], (-0.5f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn event_stops_integration() {
        // y(t) = cos t crosses 0.5 at t = pi/3.
        let opts = OdeOptions::with_tol(Tolerances::new(1e-12, 1e-12));
        let g = |_t: f64, y: &[f64]| y[0] - 0.5;
        let events = [EventSpec {
            g: &g,
            t_tol_sec: 1e-9,
        }];
        let (sol, hit) =
            integrate_with_events(&Harmonic, 0.0, &[1.0, 0.0], 10.0, &opts, &events).unwrap();
        let hit = hit.expect("event expected");
        assert_relative_eq!(hit.t_sec, std::f64::consts::FRAC_PI_3, epsilon = 1e-7);
        assert!((sol.t_end() - hit.t_sec).abs() < 1e-12);
    }

    #[test]
    fn sample_outside_span_errors() {
        let sol = integrate(&Exponential, 0.0, &[1.0], 1.0, &OdeOptions::default()).unwrap();
        let mut out = [0.0];
        assert!(sol.sample(2.0, &mut out).is_err());
    }
}
