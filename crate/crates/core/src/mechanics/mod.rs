//! Damped, thermally driven harmonic oscillator under a periodic two-level force.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};


pub const DEFAULT_SAMPLE_RATE: f64 = 2440.0;

/// Integration steps per drive period below which a run is refused.
pub const MIN_STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorParams {
    /// kg
    pub mass: f64,
    /// Hz
    pub f0: f64,
    pub q: f64,
    /// K
    pub temperature: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            mass: 1.28e-4,
            f0: 17.6,
            q: 55.0,
            temperature: 300.0,
        }
    }
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("f0", self.f0),
            ("q", self.q),
            ("temperature", self.temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidOscillator(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.f0
    }

    /// `m ω0²`, N/m.
    pub fn stiffness(&self) -> f64 {
        self.mass * self.omega0().powi(2)
    }

    /// Viscous coefficient `m ω0 / Q`, kg/s.
    pub fn damping(&self) -> f64 {
        self.mass * self.omega0() / self.q
    }

    /// Equipartition variance `k_B T / (m ω0²)`, m².
    pub fn thermal_variance(&self, k_b: f64) -> f64 {
        k_b * self.temperature / self.stiffness()
    }

    /// One-sided thermal force PSD `4 k_B T m ω0 / Q`, N²/Hz.
    pub fn force_noise_psd(&self, k_b: f64) -> f64 {
        4.0 * k_b * self.temperature * self.damping()
    }
}

pub fn check_duty(duty: f64) -> Result<()> {
    if duty > 0.0 && duty < 1.0 {
        Ok(())
    } else {
        Err(Error::DutyOutOfRange(duty))
    }
}

/// Resonant amplitude of the fundamental under a square drive of step `delta_f`.
pub fn steady_state_amplitude(osc: &OscillatorParams, delta_f: f64, duty: f64) -> Result<f64> {
    check_duty(duty)?;
    osc.validate()?;
    Ok(2.0 * osc.q * (PI * duty).sin() * delta_f / (PI * osc.stiffness()))
}

/// Square wave between `f_low` and `f_high`, high for the first `duty` of each period
/// after `phase`. A nonzero `rise_time` low-pass filters the switching (periodic
/// steady state of a first-order lag).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveWaveform {
    /// N
    pub f_low: f64,
    /// N
    pub f_high: f64,
    pub duty: f64,
    /// s
    pub period: f64,
    /// s
    #[serde(default)]
    pub phase: f64,
    /// s
    #[serde(default)]
    pub rise_time: f64,
}

impl DriveWaveform {
    pub fn square(f_low: f64, f_high: f64, duty: f64, period: f64) -> Self {
        Self {
            f_low,
            f_high,
            duty,
            period,
            phase: 0.0,
            rise_time: 0.0,
        }
    }

    /// Constant force.
    pub fn constant(f: f64, period: f64) -> Self {
        Self::square(f, f, 0.5, period)
    }

    pub fn delta(&self) -> f64 {
        (self.f_high - self.f_low).abs()
    }

    pub fn validate(&self) -> Result<()> {
        check_duty(self.duty)?;
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidOscillator(format!("drive period must be positive, got {}", self.period)));
        }
        if !(self.rise_time >= 0.0 && self.rise_time.is_finite()) {
            return Err(Error::InvalidOscillator(format!("rise time must be >= 0, got {}", self.rise_time)));
        }
        if !(self.f_low.is_finite() && self.f_high.is_finite() && self.phase.is_finite()) {
            return Err(Error::InvalidOscillator("drive levels and phase must be finite".into()));
        }
        Ok(())
    }

    /// Switching state in [0, 1] at phase `tau` within one period.
    fn level(&self, tau: f64) -> f64 {
        let on = self.duty * self.period;
        if self.rise_time == 0.0 {
            return if tau < on { 1.0 } else { 0.0 };
        }
        let (x_start, x_end) = self.lag_endpoints();
        if tau < on {
            1.0 - (1.0 - x_start) * (-tau / self.rise_time).exp()
        } else {
            x_end * (-(tau - on) / self.rise_time).exp()
        }
    }

    /// Lag state at the start and at the end of the on interval.
    fn lag_endpoints(&self) -> (f64, f64) {
        let on = self.duty * self.period;
        let a = (-(self.period - on) / self.rise_time).exp();
        let b = (-on / self.rise_time).exp();
        let x_end = (1.0 - b) / (1.0 - a * b);
        (x_end * a, x_end)
    }

    /// Integral of the switching state over `[0, tau]` within one period.
    fn level_integral(&self, tau: f64) -> f64 {
        let on = self.duty * self.period;
        if self.rise_time == 0.0 {
            return tau.min(on);
        }
        let rt = self.rise_time;
        let (x_start, x_end) = self.lag_endpoints();
        let high = |s: f64| s - (1.0 - x_start) * rt * (1.0 - (-s / rt).exp());
        if tau < on {
            high(tau)
        } else {
            high(on) + x_end * rt * (1.0 - (-(tau - on) / rt).exp())
        }
    }

    fn cumulative(&self, t: f64) -> f64 {
        let s = t - self.phase;
        let n = (s / self.period).floor();
        let tau = (s - n * self.period).clamp(0.0, self.period);
        n * self.level_integral(self.period) + self.level_integral(tau)
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t - self.phase;
        let tau = s - (s / self.period).floor() * self.period;
        self.f_low + (self.f_high - self.f_low) * self.level(tau.clamp(0.0, self.period))
    }

    /// Exact mean of the force over `[t0, t1]`.
    pub fn mean_over(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return self.value(t0);
        }
        let frac = (self.cumulative(t1) - self.cumulative(t0)) / (t1 - t0);
        self.f_low + (self.f_high - self.f_low) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Hz
    pub sample_rate: f64,
    /// Displacement samples, m. Sample `i` is at `t = i / sample_rate`.
    pub samples: Vec<f64>,
    pub seed: Option<u64>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, samples: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::Parse {
                row: 0,
                msg: format!("sample rate must be positive, got {sample_rate}"),
            });
        }
        if samples.is_empty() {
            return Err(Error::TooShort("time series has no samples".into()));
        }
        Ok(Self {
            sample_rate,
            samples,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / self.len() as f64
    }

    /// Keeps samples with `t >= t0`.
    pub fn skip_time(&self, t0: f64) -> Self {
        let k = ((t0 * self.sample_rate).ceil() as usize).min(self.len());
        Self {
            sample_rate: self.sample_rate,
            samples: self.samples[k..].to_vec(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationOptions {
    /// Output sample rate, Hz.
    pub sample_rate: f64,
    pub thermal_noise: bool,
    pub seed: u64,
    /// Integration steps per output sample; `None` picks enough for 200 steps per
    /// oscillation period.
    pub substeps: Option<usize>,
    /// Initial displacement (m) and velocity (m/s).
    pub initial: [f64; 2],
    pub consts: PhysicalConstants,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            sample_rate: DEFAULT_SAMPLE_RATE,
            thermal_noise: true,
            seed: 0,
            substeps: None,
            initial: [0.0, 0.0],
            consts: PhysicalConstants::default(),
        }
    }
}

impl SimulationOptions {
    pub fn noiseless() -> Self {
        Self {
            thermal_noise: false,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Integrates `m z'' + (m ω0 / Q) z' + m ω0² z = F_drive(t) + F_thermal(t)` with the
/// Grønbech-Jensen–Farago Langevin scheme. The drive enters as its exact average over
/// each step; the output is the state at every `substeps`-th step.
pub fn simulate(
    osc: &OscillatorParams,
    drive: &DriveWaveform,
    duration: f64,
    opts: &SimulationOptions,
) -> Result<TimeSeries> {
    osc.validate()?;
    drive.validate()?;
    if !(opts.sample_rate > 0.0 && opts.sample_rate.is_finite()) {
        return Err(Error::InvalidOscillator(format!("sample rate must be positive, got {}", opts.sample_rate)));
    }
    let period = drive.period.min(1.0 / osc.f0);
    if !(duration >= 10.0 * period) {
        return Err(Error::TooShort(format!(
            "duration {duration} s is shorter than 10 periods ({} s)",
            10.0 * period
        )));
    }
    let substeps = opts
        .substeps
        .unwrap_or_else(|| (200.0 / (period * opts.sample_rate)).ceil().max(1.0) as usize);
    if substeps == 0 {
        return Err(Error::UnstableStep("substeps must be at least 1".into()));
    }
    let dt = 1.0 / (opts.sample_rate * substeps as f64);
    let steps_per_period = period / dt;
    if steps_per_period < MIN_STEPS_PER_PERIOD || osc.omega0() * dt >= 2.0 {
        return Err(Error::UnstableStep(format!(
            "{steps_per_period:.1} steps per period (need >= {MIN_STEPS_PER_PERIOD})"
        )));
    }

    let m = osc.mass;
    let k = osc.stiffness();
    let alpha = osc.damping();
    let denom = 1.0 + alpha * dt / (2.0 * m);
    let b = 1.0 / denom;
    let a = (1.0 - alpha * dt / (2.0 * m)) / denom;
    let noise_scale = if opts.thermal_noise {
        (2.0 * alpha * opts.consts.k_b * osc.temperature * dt).sqrt()
    } else {
        0.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let n_out = (duration * opts.sample_rate).round() as usize;
    let mut out = Vec::with_capacity(n_out);
    let [mut x, mut v] = opts.initial;
    let force = |step: usize, x: f64| {
        let t = step as f64 * dt;
        drive.mean_over(t - 0.5 * dt, t + 0.5 * dt) - k * x
    };
    let mut f = force(0, x);
    let mut step = 0usize;
    for _ in 0..n_out {
        out.push(x);
        for _ in 0..substeps {
            let beta = if opts.thermal_noise {
                let xi: f64 = StandardNormal.sample(&mut rng);
                noise_scale * xi
            } else {
                0.0
            };
            let x_new = x + b * dt * v + b * dt * dt / (2.0 * m) * f + b * dt / (2.0 * m) * beta;
            step += 1;
            let f_new = force(step, x_new);
            v = a * v + dt / (2.0 * m) * (a * f + f_new) + b / m * beta;
            x = x_new;
            f = f_new;
        }
        if !(x.is_finite() && v.is_finite()) {
            return Err(Error::UnstableStep(format!("state diverged at t = {} s", step as f64 * dt)));
        }
    }
    TimeSeries::new(opts.sample_rate, out, Some(opts.seed))
}

/// Period-folded average of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedWaveform {
    /// Time within the period, s.
    pub phase: Vec<f64>,
    /// Mean-removed, peak-normalized waveform.
    pub waveform: Vec<f64>,
    /// Pointwise segment average before normalization, m.
    pub raw: Vec<f64>,
    pub n_segments: usize,
}

/// Splits the series into consecutive `period`-long segments and averages them
/// pointwise (linear interpolation onto a common phase grid).
pub fn segment_average(ts: &TimeSeries, period: f64) -> Result<FoldedWaveform> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::TooShort(format!("invalid period {period}")));
    }
    let n_segments = (ts.duration() / period).floor() as usize;
    // The last segment needs one sample past its end for interpolation.
    let n_segments = if (n_segments as f64 * period * ts.sample_rate).ceil() as usize >= ts.len() {
        n_segments.saturating_sub(1)
    } else {
        n_segments
    };
    if n_segments < 2 {
        return Err(Error::TooShort(format!(
            "{} s of data holds fewer than 2 periods of {period} s",
            ts.duration()
        )));
    }
    let n_bins = ((period * ts.sample_rate).floor() as usize).max(2);
    let phase: Vec<f64> = (0..n_bins).map(|k| k as f64 * period / n_bins as f64).collect();
    let mut raw = vec![0.0; n_bins];
    for s in 0..n_segments {
        let t0 = s as f64 * period;
        for (acc, ph) in raw.iter_mut().zip(&phase) {
            let u = (t0 + ph) * ts.sample_rate;
            let i = u.floor() as usize;
            let w = u - i as f64;
            *acc += (1.0 - w) * ts.samples[i] + w * ts.samples[i + 1];
        }
    }
    for r in &mut raw {
        *r /= n_segments as f64;
    }
    let mean = raw.iter().sum::<f64>() / n_bins as f64;
    let peak = raw.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max);
    let waveform = raw
        .iter()
        .map(|r| if peak > 0.0 { (r - mean) / peak } else { 0.0 })
        .collect();
    Ok(FoldedWaveform {
        phase,
        waveform,
        raw,
        n_segments,
    })
}

/// Least-squares fit of `c + a cos + b sin` at one cycle per record; returns the
/// Pearson correlation between the data and the fit.
pub fn sinusoid_correlation(waveform: &[f64]) -> f64 {
    let n = waveform.len();
    if n < 3 {
        return 0.0;
    }
    let mean = waveform.iter().sum::<f64>() / n as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for (k, y) in waveform.iter().enumerate() {
        let ph = 2.0 * PI * k as f64 / n as f64;
        a += (y - mean) * ph.cos();
        b += (y - mean) * ph.sin();
    }
    a *= 2.0 / n as f64;
    b *= 2.0 / n as f64;
    let fit: Vec<f64> = (0..n)
        .map(|k| {
            let ph = 2.0 * PI * k as f64 / n as f64;
            a * ph.cos() + b * ph.sin()
        })
        .collect();
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (y, f) in waveform.iter().zip(&fit) {
        sxy += (y - mean) * f;
        sxx += (y - mean).powi(2);
        syy += f * f;
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
