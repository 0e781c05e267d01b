//! Adaptive Dormand–Prince 5(4) integration with steady-state and
//! oscillation detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eco_rhs, evo_rhs, EcoParams, EvoConfig};

/// An autonomous ODE system whose first two components are population densities.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, y: &[f64; N]) -> Result<[f64; N]>;
}

impl OdeSystem<2> for EcoParams {
    fn rhs(&self, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok(eco_rhs(*y, self))
    }
}

impl OdeSystem<4> for EvoConfig {
    fn rhs(&self, y: &[f64; 4]) -> Result<[f64; 4]> {
        evo_rhs(*y, self)
    }
}

fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_samples() -> usize {
    20_001
}
fn default_true() -> bool {
    true
}

/// Integration settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub initial: Vec<f64>,
    pub t_end: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Upper bound on the step size; unbounded when absent.
    #[serde(default)]
    pub max_step: Option<f64>,
    /// Number of uniformly spaced recorded samples, including t = 0 and t_end.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub detect_events: bool,
}

pub const MAX_SAMPLES: usize = 200_000;

impl SimSpec {
    pub fn new(initial: Vec<f64>, t_end: f64) -> Self {
        Self {
            initial,
            t_end,
            rtol: default_rtol(),
            atol: default_atol(),
            max_step: None,
            samples: default_samples(),
            detect_events: true,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.initial.len() != dim {
            return Err(Error::param(
                "initial",
                format!("expected {dim} components, got {}", self.initial.len()),
            ));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("initial", "must be finite"));
        }
        if self.initial.iter().take(2).any(|v| *v < 0.0) {
            return Err(Error::param("initial", "population densities must be >= 0"));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::param("t_end", "must be finite and > 0"));
        }
        if !(1e-12..=1e-3).contains(&self.rtol) {
            return Err(Error::param("rtol", "must lie in [1e-12, 1e-3]"));
        }
        if !(self.atol.is_finite() && self.atol > 0.0) {
            return Err(Error::param("atol", "must be finite and > 0"));
        }
        if let Some(m) = self.max_step {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::param("max_step", "must be finite and > 0"));
            }
        }
        if !(2..=MAX_SAMPLES).contains(&self.samples) {
            return Err(Error::param("samples", format!("must lie in [2, {MAX_SAMPLES}]")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerminalEvent {
    ReachedTEnd,
    Converged { state: Vec<f64> },
    Oscillating { period: f64, amplitude: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Max-norm of the right-hand side at the final state.
    pub final_rhs_norm: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub event: TerminalEvent,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 100_000_000;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let s: f64 = terms.iter().map(|(c, k)| c * k[i]).sum();
        *o += h * s;
    }
    out
}

/// Integrates `sys` from `spec.initial` over [0, t_end].
pub fn integrate<const N: usize, S: OdeSystem<N>>(sys: &S, spec: &SimSpec) -> Result<Trajectory> {
    spec.validate(N)?;
    let mut y: [f64; N] = spec.initial.clone().try_into().expect("length validated");
    let t_end = spec.t_end;
    let max_step = spec.max_step.unwrap_or(t_end).min(t_end);
    let n_out = spec.samples;
    let out_time = |k: usize| {
        if k + 1 == n_out {
            t_end
        } else {
            t_end * k as f64 / (n_out - 1) as f64
        }
    };

    let mut times = Vec::with_capacity(n_out);
    let mut states = Vec::with_capacity(n_out);
    times.push(0.0);
    states.push(y.to_vec());
    let mut next_out = 1;

    let mut k1 = sys.rhs(&y)?;
    let mut h = initial_step(&y, &k1, spec).min(max_step);
    let mut t = 0.0;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let h_min = 1e-14 * t_end;

    while t < t_end {
        if accepted + rejected > MAX_STEPS {
            return Err(Error::NoConvergence(format!("step budget exhausted at t = {t}")));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        if h < h_min && t + h < t_end {
            return Err(Error::StepUnderflow { t, h });
        }
        let k2 = sys.rhs(&combine(&y, h, &[(A21, &k1)]))?;
        let k3 = sys.rhs(&combine(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = sys.rhs(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = sys.rhs(&combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = sys.rhs(&combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ))?;
        let y1 = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(&y1)?;

        let mut err = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = spec.atol + spec.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            rejected += 1;
            h *= 0.2;
            continue;
        }

        // Overshooting below zero is an integration artifact; retry smaller.
        let undershoot = y1.iter().take(2).any(|v| *v < -spec.atol);
        if err <= 1.0 && undershoot {
            rejected += 1;
            h *= 0.5;
            continue;
        }
        if err <= 1.0 {
            let t1 = t + h;
            // Dense output on [t, t1].
            while next_out < n_out && out_time(next_out) <= t1 {
                let to = out_time(next_out);
                let theta = (to - t) / h;
                let th1 = 1.0 - theta;
                let mut yo = [0.0; N];
                for i in 0..N {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    let r4 = dy - h * k7[i] - bspl;
                    let r5 = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                    yo[i] = y[i] + theta * (dy + th1 * (bspl + theta * (r4 + th1 * r5)));
                }
                for i in 0..N.min(2) {
                    let floor = y[i].min(y1[i]);
                    if yo[i] < floor && yo[i] < 0.0 {
                        yo[i] = floor;
                    }
                }
                if next_out + 1 == n_out {
                    yo = y1;
                }
                times.push(to);
                states.push(yo.to_vec());
                next_out += 1;
            }
            t = t1;
            y = y1;
            k1 = k7;
            // Zero is invariant for the population components.
            let mut clamped = false;
            for v in y.iter_mut().take(2) {
                if *v < 0.0 && *v > -spec.atol {
                    *v = 0.0;
                    clamped = true;
                }
            }
            if clamped {
                k1 = sys.rhs(&y)?;
            }
            accepted += 1;
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            h = (h * fac).min(max_step);
        } else {
            rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
    }
    if let Some(last) = states.last_mut() {
        *last = y.to_vec();
    }

    let final_rhs = sys.rhs(&y)?;
    let final_rhs_norm = final_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut traj = Trajectory {
        times,
        states,
        final_rhs_norm,
        accepted_steps: accepted,
        rejected_steps: rejected,
        event: TerminalEvent::ReachedTEnd,
    };
    if spec.detect_events {
        traj.event = detect_events(&traj);
    }
    Ok(traj)
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], spec: &SimSpec) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = spec.atol + spec.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(spec.t_end * 1e-3).max(1e-12 * spec.t_end)
}

pub fn integrate_eco(p: &EcoParams, spec: &SimSpec) -> Result<Trajectory> {
    p.validate()?;
    integrate::<2, _>(p, spec)
}

pub fn integrate_evo(cfg: &EvoConfig, spec: &SimSpec) -> Result<Trajectory> {
    cfg.validate()?;
    integrate::<4, _>(cfg, spec)
}

/// Minimum number of samples needed for event detection.
pub const MIN_WINDOW: usize = 1000;
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Classifies the end of a trajectory as converged, oscillating or neither.
pub fn detect_events(traj: &Trajectory) -> TerminalEvent {
    let n = traj.states.len();
    if n < MIN_WINDOW {
        return TerminalEvent::ReachedTEnd;
    }
    let window = (n / 10).max(MIN_WINDOW);
    let tail = &traj.states[n - window..];
    let dim = traj.dim();
    let spread = (0..dim)
        .map(|i| {
            let (lo, hi) = tail
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[i]), hi.max(s[i])));
            hi - lo
        })
        .fold(0.0, f64::max);
    if traj.final_rhs_norm < CONVERGENCE_TOL && spread < CONVERGENCE_TOL {
        return TerminalEvent::Converged { state: traj.last_state().to_vec() };
    }
    match oscillation(traj, 0) {
        Some(o) => TerminalEvent::Oscillating { period: o.period, amplitude: o.amplitude },
        None => TerminalEvent::ReachedTEnd,
    }
}

/// Peak statistics of one component over the second half of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSeries {
    pub peak_times: Vec<f64>,
    pub period: f64,
    pub amplitude: f64,
    pub spacing_cv: f64,
}

pub const MIN_PEAKS: usize = 4;
pub const MIN_RELATIVE_AMPLITUDE: f64 = 1e-3;
pub const MAX_SPACING_CV: f64 = 0.2;

/// Major peaks (local maxima in the upper half of the range) of component
/// `i` after discarding the first half of the run. None unless the series
/// oscillates regularly.
pub fn oscillation(traj: &Trajectory, i: usize) -> Option<PeakSeries> {
    let n = traj.states.len();
    let start = n / 2;
    let t = &traj.times[start..];
    let x: Vec<f64> = traj.states[start..].iter().map(|s| s[i]).collect();
    if x.len() < 3 {
        return None;
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > 0.0) || (hi - lo) / hi <= MIN_RELATIVE_AMPLITUDE {
        return None;
    }
    let cut = lo + 0.5 * (hi - lo);
    let mut peaks = Vec::new();
    for k in 1..x.len() - 1 {
        if x[k] >= cut && x[k] > x[k - 1] && x[k] >= x[k + 1] {
            peaks.push(refine_peak(&t[k - 1..=k + 1], &x[k - 1..=k + 1]));
        }
    }
    if peaks.len() < MIN_PEAKS {
        return None;
    }
    let gaps: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
    let cv = var.sqrt() / mean;
    (cv < MAX_SPACING_CV).then_some(PeakSeries {
        peak_times: peaks,
        period: mean,
        amplitude: hi - lo,
        spacing_cv: cv,
    })
}

/// Vertex of the parabola through three samples.
fn refine_peak(t: &[f64], x: &[f64]) -> f64 {
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let den = (t0 - t1) * (t0 - t2) * (t1 - t2);
    if den == 0.0 {
        return t1;
    }
    let a = (t2 * (x1 - x0) + t1 * (x0 - x2) + t0 * (x2 - x1)) / den;
    let b = (t2 * t2 * (x0 - x1) + t1 * t1 * (x2 - x0) + t0 * t0 * (x1 - x2)) / den;
    if a >= 0.0 {
        return t1;
    }
    let v = -b / (2.0 * a);
    if v >= t0 && v <= t2 {
        v
    } else {
        t1
    }
}

/// Phase relation between host and parasite peaks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub period: f64,
    /// Mean of |lag| over host peaks, as a fraction of the period in [0, 0.5].
    pub mean_abs_lag: f64,
    /// Signed lag of the nearest parasite peak after each host peak, in [-0.5, 0.5).
    pub lags: Vec<f64>,
    pub host: PeakSeries,
    pub parasite: PeakSeries,
}

pub fn phase_metrics(traj: &Trajectory) -> Result<PhaseReport> {
    let host = oscillation(traj, 0).ok_or(Error::NotOscillating)?;
    let parasite = oscillation(traj, 1).ok_or(Error::NotOscillating)?;
    let period = host.period;
    let lags: Vec<f64> = host
        .peak_times
        .iter()
        .map(|tp| {
            let nearest = parasite
                .peak_times
                .iter()
                .copied()
                .min_by(|a, b| (a - tp).abs().total_cmp(&(b - tp).abs()))
                .expect("at least MIN_PEAKS parasite peaks");
            let phase = (nearest - tp) / period;
            phase - (phase + 0.5).floor()
        })
        .collect();
    let mean_abs_lag = lags.iter().map(|l| l.abs()).sum::<f64>() / lags.len() as f64;
    Ok(PhaseReport { period, mean_abs_lag, lags, host, parasite })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl OdeSystem<2> for Decay {
        fn rhs(&self, y: &[f64; 2]) -> Result<[f64; 2]> {
            Ok([-y[0], -2.0 * y[1]])
        }
    }

    #[test]
    fn exponential_decay_with_dense_output() {
        let mut spec = SimSpec::new(vec![1.0, 1.0], 5.0);
        spec.samples = 51;
        let traj = integrate::<2, _>(&Decay, &spec).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s[0] - (-t).exp()).abs() < 1e-8, "t={t}");
            assert!((s[1] - (-2.0 * t).exp()).abs() < 1e-8, "t={t}");
        }
        assert_eq!(*traj.times.last().unwrap(), 5.0);
    }

    fn synthetic(shift: f64) -> Trajectory {
        let n = 20_001;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.01).collect();
        let states = times
            .iter()
            .map(|t| {
                let w = std::f64::consts::TAU / 10.0;
                vec![2.0 + (w * t).sin(), 2.0 + (w * t + shift).sin()]
            })
            .collect();
        Trajectory {
            times,
            states,
            final_rhs_norm: 1.0,
            accepted_steps: 0,
            rejected_steps: 0,
            event: TerminalEvent::ReachedTEnd,
        }
    }

    #[test]
    fn antiphase_sines() {
        let r = phase_metrics(&synthetic(std::f64::consts::PI)).unwrap();
        assert!((r.mean_abs_lag - 0.5).abs() < 1e-6, "{}", r.mean_abs_lag);
        assert!((r.period - 10.0).abs() < 1e-6);
    }

    #[test]
    fn inphase_sines() {
        let r = phase_metrics(&synthetic(0.0)).unwrap();
        assert!(r.mean_abs_lag < 1e-6);
    }

    #[test]
    fn constant_trajectory_converges() {
        let mut t = synthetic(0.0);
        for s in &mut t.states {
            s.iter_mut().for_each(|v| *v = 1.5);
        }
        t.final_rhs_norm = 0.0;
        assert!(matches!(detect_events(&t), TerminalEvent::Converged { .. }));
    }
}
