//! Welch PSD, resonance peak area, force inversion and time-series I/O.
//!
//! PSD values use an amplitude-squared convention: twice the usual one-sided
//! density, so a sinusoid of amplitude `A` has peak area `A²` and the whole
//! spectrum integrates to twice the variance.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanics::{check_duty, OscillatorParams, TimeSeries};

mod io;

pub use io::{export_timeseries, import_timeseries, sidecar_path, TimeSeriesFormat, TimeSeriesMeta};

#[cfg(test)]
mod tests;

/// Default band half-width in resolution bandwidths.
pub const DEFAULT_BAND_BINS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        match self {
            // Periodic Hann: exact 50% overlap-add and a clean two-bin main lobe.
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rectangular",
        }
    }
}

impl std::str::FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hann" | "hanning" => Ok(Window::Hann),
            "rectangular" | "rect" | "boxcar" => Ok(Window::Rectangular),
            other => Err(format!("unknown window '{other}' (expected hann or rectangular)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    /// Hz
    pub frequencies: Vec<f64>,
    /// m²/Hz, amplitude-squared convention.
    pub values: Vec<f64>,
    pub window: Window,
    /// Bin spacing `1 / segment_length`, Hz.
    pub resolution_bandwidth: f64,
    pub segment_samples: usize,
    pub n_segments: usize,
}

impl PsdEstimate {
    /// Rectangle-rule integral over all bins.
    pub fn total_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.resolution_bandwidth
    }

    pub fn nyquist(&self) -> f64 {
        *self.frequencies.last().unwrap_or(&0.0)
    }

    /// Indices of bins with `lo <= |f - f0| <= hi`.
    fn bins_within(&self, f0: f64, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        // Half-bin slack so a band edge on a bin center is counted once.
        let eps = 1e-9 * self.resolution_bandwidth;
        self.frequencies
            .iter()
            .enumerate()
            .filter(move |(_, f)| {
                let d = (*f - f0).abs();
                d + eps >= lo && d <= hi + eps
            })
            .map(|(i, _)| i)
    }

    pub fn band_integral(&self, f0: f64, delta_f: f64) -> f64 {
        self.bins_within(f0, 0.0, delta_f).map(|i| self.values[i]).sum::<f64>() * self.resolution_bandwidth
    }
}

/// Averaged periodogram with 50% overlap; each segment has its mean removed.
pub fn estimate_psd(ts: &TimeSeries, segment_length: f64, window: Window) -> Result<PsdEstimate> {
    let n = (segment_length * ts.sample_rate).round() as usize;
    if n < 4 {
        return Err(Error::TooShort(format!("segment of {segment_length} s has fewer than 4 samples")));
    }
    if ts.len() < 2 * n {
        return Err(Error::TooShort(format!(
            "{} samples do not hold two segments of {n}",
            ts.len()
        )));
    }
    let hop = n / 2;
    let n_segments = (ts.len() - n) / hop + 1;
    let w = window.coefficients(n);
    let s2: f64 = w.iter().map(|x| x * x).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let n_bins = n / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for s in 0..n_segments {
        let seg = &ts.samples[s * hop..s * hop + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        for ((b, x), wi) in buf.iter_mut().zip(seg).zip(&w) {
            *b = Complex::new((x - mean) * wi, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 4.0 / (ts.sample_rate * s2 * n_segments as f64);
    let values = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let edge = k == 0 || (n % 2 == 0 && k == n / 2);
            a * scale * if edge { 0.5 } else { 1.0 }
        })
        .collect();
    let df = ts.sample_rate / n as f64;
    Ok(PsdEstimate {
        frequencies: (0..n_bins).map(|k| k as f64 * df).collect(),
        values,
        window,
        resolution_bandwidth: df,
        segment_samples: n,
        n_segments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEstimate {
    /// Background-subtracted amplitude, m.
    pub amplitude: f64,
    /// Amplitude from the raw band integral, m.
    pub amplitude_raw: f64,
    /// Hz
    pub band: (f64, f64),
    pub background_subtracted: bool,
    /// Mean flank density, m²/Hz.
    pub background: f64,
}

/// `A² = ∫ S df` over `|f - f0| <= delta_f`, minus a background taken from the two
/// flanking bands `delta_f < |f - f0| <= 3 delta_f`.
pub fn amplitude_from_peak(psd: &PsdEstimate, f0: f64, delta_f: f64) -> Result<AmplitudeEstimate> {
    let max = psd.nyquist();
    if !(delta_f > 0.0) || f0 - 3.0 * delta_f < 0.0 || f0 + 3.0 * delta_f > max {
        return Err(Error::BandOutOfRange {
            lo: f0 - 3.0 * delta_f,
            hi: f0 + 3.0 * delta_f,
            max,
        });
    }
    let band: Vec<usize> = psd.bins_within(f0, 0.0, delta_f).collect();
    let flank_mean = |below: bool| {
        let idx: Vec<usize> = psd
            .bins_within(f0, delta_f * (1.0 + 1e-9) + 1e-12, 3.0 * delta_f)
            .filter(|&i| (psd.frequencies[i] < f0) == below)
            .collect();
        idx.iter().map(|&i| psd.values[i]).sum::<f64>() / idx.len().max(1) as f64
    };
    let background = 0.5 * (flank_mean(true) + flank_mean(false));
    let raw: f64 = band.iter().map(|&i| psd.values[i]).sum::<f64>() * psd.resolution_bandwidth;
    let subtracted = raw - background * band.len() as f64 * psd.resolution_bandwidth;
    Ok(AmplitudeEstimate {
        amplitude: subtracted.max(0.0).sqrt(),
        amplitude_raw: raw.sqrt(),
        band: (f0 - delta_f, f0 + delta_f),
        background_subtracted: true,
        background,
    })
}

/// Highest bin in `|f - f0| <= delta_f` over the mean of the flanking bands.
pub fn peak_to_floor(psd: &PsdEstimate, f0: f64, delta_f: f64) -> Result<f64> {
    let est = amplitude_from_peak(psd, f0, delta_f)?;
    let peak = psd
        .bins_within(f0, 0.0, delta_f)
        .map(|i| psd.values[i])
        .fold(0.0, f64::max);
    Ok(peak / est.background)
}

/// `ΔF = (π/2) m ω0² A / (Q sin πD)`.
pub fn force_from_amplitude(amplitude: f64, osc: &OscillatorParams, duty: f64) -> Result<f64> {
    check_duty(duty)?;
    osc.validate()?;
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidOscillator(format!("amplitude must be >= 0, got {amplitude}")));
    }
    Ok(0.5 * PI * osc.stiffness() * amplitude / (osc.q * (PI * duty).sin()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryOptions {
    /// s
    pub segment_length: f64,
    pub window: Window,
    /// Band half-width, Hz; `None` uses `DEFAULT_BAND_BINS` resolution bandwidths.
    pub band_halfwidth: Option<f64>,
    /// Initial transient to discard, s.
    pub skip: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            segment_length: 100.0,
            window: Window::Hann,
            band_halfwidth: None,
            skip: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub psd: PsdEstimate,
    pub amplitude: AmplitudeEstimate,
    /// From the background-subtracted amplitude, N.
    pub delta_f: f64,
    /// From the raw band integral, N.
    pub delta_f_raw: f64,
    pub peak_to_floor: f64,
}

/// Series -> PSD -> peak area -> force, at drive frequency `f_drive`.
pub fn recover_force(
    ts: &TimeSeries,
    osc: &OscillatorParams,
    duty: f64,
    f_drive: f64,
    opts: &RecoveryOptions,
) -> Result<Recovery> {
    let tail = ts.skip_time(opts.skip);
    let psd = estimate_psd(&tail, opts.segment_length, opts.window)?;
    let delta_f = opts
        .band_halfwidth
        .unwrap_or(DEFAULT_BAND_BINS * psd.resolution_bandwidth);
    let amplitude = amplitude_from_peak(&psd, f_drive, delta_f)?;
    let ratio = peak_to_floor(&psd, f_drive, delta_f)?;
    Ok(Recovery {
        delta_f: force_from_amplitude(amplitude.amplitude, osc, duty)?,
        delta_f_raw: force_from_amplitude(amplitude.amplitude_raw, osc, duty)?,
        amplitude,
        psd,
        peak_to_floor: ratio,
    })
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::io(PathBuf::from(path), e)
}
