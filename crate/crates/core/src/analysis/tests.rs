use super::*;
use crate::mechanics::{simulate, steady_state_amplitude, DriveWaveform, SimulationOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const FS: f64 = 2440.0;
const F0: f64 = 17.6;

fn tone(parts: &[(f64, f64, f64)], duration: f64) -> TimeSeries {
    let samples = (0..(duration * FS) as usize)
        .map(|i| {
            let t = i as f64 / FS;
            parts.iter().map(|(a, f, ph)| a * (2.0 * PI * f * t + ph).sin()).sum()
        })
        .collect();
    TimeSeries::new(FS, samples, None).unwrap()
}

fn white(sigma: f64, duration: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..(duration * FS) as usize)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            sigma * x
        })
        .collect()
}

#[test]
fn unit_sinusoid_peak_area() {
    let psd = estimate_psd(&tone(&[(1.0, F0, 0.3)], 200.0), 20.0, Window::Hann).unwrap();
    let area = psd.band_integral(F0, 3.0 * psd.resolution_bandwidth);
    assert!((area - 1.0).abs() < 0.02, "{area}");
    assert!((psd.resolution_bandwidth - 0.05).abs() < 1e-12);
    assert!(psd.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn white_noise_is_flat_and_integrates_to_twice_variance() {
    let sigma = 2e-9;
    let ts = TimeSeries::new(FS, white(sigma, 400.0, 1), None).unwrap();
    let psd = estimate_psd(&ts, 10.0, Window::Hann).unwrap();
    assert!((psd.total_power() / (2.0 * sigma * sigma) - 1.0).abs() < 0.05);
    let level = 2.0 * sigma * sigma / (FS / 2.0);
    let mid: Vec<f64> = psd.values[100..psd.values.len() - 100].to_vec();
    let mean = mid.iter().sum::<f64>() / mid.len() as f64;
    assert!((mean / level - 1.0).abs() < 0.05);
}

#[test]
fn parseval_on_deterministic_signals() {
    let parts = [(3e-8, F0, 0.1), (1e-8, 3.0 * F0, 1.0), (5e-9, 101.3, 2.0)];
    let ts = tone(&parts, 200.0);
    for window in [Window::Hann, Window::Rectangular] {
        let psd = estimate_psd(&ts, 20.0, window).unwrap();
        let rel = psd.total_power() / (2.0 * ts.variance()) - 1.0;
        assert!(rel.abs() < 0.01, "{window:?}: {rel}");
    }
}

#[test]
fn brownian_peak_area_matches_equipartition() {
    let osc = OscillatorParams::default();
    let opts = SimulationOptions::default().with_seed(11);
    let ts = simulate(&osc, &DriveWaveform::constant(0.0, 1.0 / F0), 1200.0, &opts).unwrap();
    let psd = estimate_psd(&ts.skip_time(10.0), 20.0, Window::Hann).unwrap();
    let expected = 2.0 * osc.thermal_variance(opts.consts.k_b);
    assert!((psd.total_power() / expected - 1.0).abs() < 0.15);
    // The peak sits at f0.
    let imax = (0..psd.values.len()).max_by(|a, b| psd.values[*a].total_cmp(&psd.values[*b])).unwrap();
    assert!((psd.frequencies[imax] - F0).abs() < 0.3);
}

#[test]
fn amplitude_of_synthetic_tone() {
    let psd = estimate_psd(&tone(&[(1e-7, F0, 0.0)], 400.0), 20.0, Window::Hann).unwrap();
    let est = amplitude_from_peak(&psd, F0, 0.2).unwrap();
    assert!((est.amplitude / 1e-7 - 1.0).abs() < 0.02, "{est:?}");
    assert!(est.band.0 < F0 && F0 < est.band.1);
    assert!(est.background_subtracted);
}

#[test]
fn background_is_subtracted_and_raw_reported() {
    let mut ts = tone(&[(1e-8, F0, 0.0)], 400.0);
    for (s, n) in ts.samples.iter_mut().zip(white(2e-8, 400.0, 4)) {
        *s += n;
    }
    let psd = estimate_psd(&ts, 20.0, Window::Hann).unwrap();
    let est = amplitude_from_peak(&psd, F0, 0.25).unwrap();
    assert!(est.amplitude_raw > est.amplitude);
    assert!((est.amplitude / 1e-8 - 1.0).abs() < 0.05, "{est:?}");
}

#[test]
fn harmonics_stay_out_of_the_band() {
    let one = estimate_psd(&tone(&[(1e-7, F0, 0.0)], 200.0), 20.0, Window::Hann).unwrap();
    let two = estimate_psd(&tone(&[(1e-7, F0, 0.0), (3e-8, 3.0 * F0, 0.5)], 200.0), 20.0, Window::Hann).unwrap();
    let a = amplitude_from_peak(&one, F0, 0.25).unwrap().amplitude;
    let b = amplitude_from_peak(&two, F0, 0.25).unwrap().amplitude;
    assert!((a / b - 1.0).abs() < 1e-6);
}

#[test]
fn band_outside_spectrum() {
    let psd = estimate_psd(&tone(&[(1.0, F0, 0.0)], 100.0), 10.0, Window::Hann).unwrap();
    assert!(matches!(amplitude_from_peak(&psd, 0.1, 0.2), Err(Error::BandOutOfRange { .. })));
    assert!(matches!(amplitude_from_peak(&psd, 1219.9, 0.2), Err(Error::BandOutOfRange { .. })));
}

#[test]
fn psd_needs_two_segments() {
    let ts = tone(&[(1.0, F0, 0.0)], 15.0);
    assert!(matches!(estimate_psd(&ts, 10.0, Window::Hann), Err(Error::TooShort(_))));
}

#[test]
fn force_inversion_examples() {
    let osc = OscillatorParams::default();
    let f = force_from_amplitude(1e-7, &osc, 0.5).unwrap();
    assert!((f / 4.5e-9 - 1.0).abs() < 0.01, "{f}");
    assert_eq!(force_from_amplitude(0.0, &osc, 0.5).unwrap(), 0.0);
    let a = force_from_amplitude(1e-7, &osc, 0.25).unwrap();
    let b = force_from_amplitude(1e-7, &osc, 0.75).unwrap();
    assert!((a / b - 1.0).abs() < 1e-14);
    assert!(matches!(force_from_amplitude(1e-7, &osc, 1.0), Err(Error::DutyOutOfRange(_))));
}

proptest! {
    #[test]
    fn inversion_round_trip(df in 1e-12f64..1e-6, duty in 0.01f64..0.99) {
        let osc = OscillatorParams::default();
        let a = steady_state_amplitude(&osc, df, duty).unwrap();
        let back = force_from_amplitude(a, &osc, duty).unwrap();
        prop_assert!((back / df - 1.0).abs() < 1e-12);
    }
}

fn driven(df: f64, duty: f64, noise: bool, duration: f64, seed: u64) -> TimeSeries {
    let osc = OscillatorParams::default();
    let drive = DriveWaveform::square(-3e-9, -3e-9 - df, duty, 1.0 / F0);
    let opts = SimulationOptions {
        thermal_noise: noise,
        ..SimulationOptions::default().with_seed(seed)
    };
    simulate(&osc, &drive, duration, &opts).unwrap()
}

#[test]
fn end_to_end_recovery() {
    let osc = OscillatorParams::default();
    for (df, duty, noise) in [(1e-9, 0.48, false), (5e-9, 0.2, true)] {
        let ts = driven(df, duty, noise, 400.0, 9);
        let r = recover_force(&ts, &osc, duty, F0, &RecoveryOptions::default()).unwrap();
        assert!((r.delta_f / df - 1.0).abs() < 0.05, "{df} {duty}: {}", r.delta_f);
        assert!(r.peak_to_floor > 1e3);
    }
}

#[test]
fn peak_area_converges_as_peak_sharpens() {
    let measure = |duration: f64| {
        let ts = driven(1e-9, 0.48, true, duration + 10.0, 21).skip_time(10.0);
        let psd = estimate_psd(&ts, duration / 2.0, Window::Hann).unwrap();
        let a = amplitude_from_peak(&psd, F0, 0.1).unwrap().amplitude;
        let height = psd.values.iter().cloned().fold(0.0, f64::max);
        let width = psd.values.iter().filter(|v| **v > 0.5 * height).count() as f64 * psd.resolution_bandwidth;
        (a, height, width)
    };
    let (a1, h1, w1) = measure(300.0);
    let (a2, h2, w2) = measure(600.0);
    assert!((a2 / a1 - 1.0).abs() < 0.02);
    assert!(h2 > 1.5 * h1);
    assert!(w2 < w1);
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let mut ts = driven(2e-9, 0.48, true, 3.0, 5);
    ts.samples[3] = 1.234567890123456e-300;
    export_timeseries(&path, &ts, serde_json::json!({"duty": 0.48})).unwrap();
    let back = import_timeseries(&path, &TimeSeriesFormat::default()).unwrap();
    assert_eq!(back, ts);
    let meta: TimeSeriesMeta = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
    assert_eq!(meta.params["duty"], 0.48);
    // Without the sidecar the rate comes from the time column.
    std::fs::remove_file(sidecar_path(&path)).unwrap();
    let back = import_timeseries(&path, &TimeSeriesFormat::default()).unwrap();
    assert!((back.sample_rate / FS - 1.0).abs() < 1e-9);
    assert_eq!(back.samples, ts.samples);
}

#[test]
fn import_errors() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let nan = write("nan.csv", "t,z\n0,1.0\n0.5,NaN\n1.0,2.0\n");
    match import_timeseries(&nan, &TimeSeriesFormat::default()) {
        Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
        other => panic!("{other:?}"),
    }
    let empty = write("empty.csv", "t,z\n");
    assert!(matches!(import_timeseries(&empty, &TimeSeriesFormat::default()), Err(Error::TooShort(_))));
    let gap = write("gap.csv", "t,z\n0,1\n0.5,1\n1.5,1\n2.0,1\n");
    match import_timeseries(&gap, &TimeSeriesFormat::default()) {
        Err(Error::NonuniformSampling { row, .. }) => assert_eq!(row, 4),
        other => panic!("{other:?}"),
    }
    let bad = write("bad.csv", "t,z\n0,1\n0.5,abc\n");
    assert!(matches!(import_timeseries(&bad, &TimeSeriesFormat::default()), Err(Error::Parse { row: 3, .. })));
    let missing = dir.path().join("missing.csv");
    assert!(matches!(import_timeseries(&missing, &TimeSeriesFormat::default()), Err(Error::Io { .. })));
}

#[test]
fn window_names_parse() {
    assert_eq!("Hann".parse::<Window>().unwrap(), Window::Hann);
    assert_eq!("rect".parse::<Window>().unwrap(), Window::Rectangular);
    assert!("kaiser".parse::<Window>().is_err());
}
