//! Subcommand and figure runners. Each returns a [`RunOutput`]; nothing here
//! touches the filesystem except [`run_analyze`], which reads its input series.

use std::f64::consts::PI;
use std::path::Path;

use spinlev_core::Vector3;
use rayon::prelude::*;
use serde_json::json;
use spinlev_core::analysis::{import_timeseries, recover_force, Recovery, RecoveryOptions, TimeSeriesFormat};
use spinlev_core::force_model::{axial_gradient, ForceResult};
use spinlev_core::magnetostatics::{field_map, RectGrid, FIELD_MAP_HEADER};
use spinlev_core::mechanics::{
    segment_average, simulate, sinusoid_correlation, steady_state_amplitude, DriveWaveform, OscillatorParams,
    TimeSeries,
};
use spinlev_core::nv_spin::{build_hamiltonian, seven_level_steady_state, LaserDrive};
use spinlev_core::{CylindricalMagnet, NVOrientation};

use crate::config::Resolved;
use crate::output::{Cell, RunOutput, Table};
use crate::plots;
use crate::CliError;

/// Seed for the `index`-th independent trajectory of a scenario.
pub fn derive_seed(base: u64, index: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

/// Highest frequency written in figure PSD tables, in units of `f0`.
const PSD_TABLE_SPAN: f64 = 3.5;

fn row<const N: usize>(cells: [Cell; N]) -> Vec<Cell> {
    cells.into()
}

/// Model forces at the scenario spot for one magnet, gap and power.
pub fn model_force(
    r: &Resolved,
    magnet: &CylindricalMagnet,
    gap: f64,
    power: f64,
    polarizing: bool,
) -> Result<ForceResult, CliError> {
    let diamond = r.diamond_at(gap);
    let spot = r.spot.with_power(power);
    Ok(r.force_model().ensemble_force(&diamond, &spot, magnet, polarizing)?)
}

/// Square drive between the thermal and laser-on forces, at the resonance.
pub fn drive_for(r: &Resolved, force: &ForceResult, duty: f64) -> DriveWaveform {
    let sign = if force.f_gl >= force.f_th { 1.0 } else { -1.0 };
    DriveWaveform {
        rise_time: r.scenario.rise_time,
        ..DriveWaveform::square(force.f_th, force.f_th + sign * force.delta_f, duty, 1.0 / r.oscillator.f0)
    }
}

fn simulate_and_recover(
    r: &Resolved,
    drive: &DriveWaveform,
    seed: u64,
) -> Result<(TimeSeries, Recovery), CliError> {
    let ts = simulate(&r.oscillator, drive, r.scenario.duration, &r.simulation_options(seed))?;
    let rec = recover_force(&ts, &r.oscillator, drive.duty, r.oscillator.f0, &r.recovery_options())?;
    Ok((ts, rec))
}

fn spot_sample(r: &Resolved, magnet: &CylindricalMagnet, gap: f64) -> Result<(f64, f64, f64), CliError> {
    let diamond = r.diamond_at(gap);
    let p = diamond.bottom_center(magnet) + Vector3::new(0.0, r.spot.lateral, r.spot.height);
    let s = magnet.sample(&p)?;
    Ok((p.z - magnet.pole_face_position, s.b.norm(), s.dbz_dz()))
}

// ---------------------------------------------------------------- field

pub struct FieldArgs {
    pub z_max: f64,
    pub points: usize,
    /// Grid points per side for an x-z map; 0 skips the map.
    pub map_points: usize,
}

pub fn run_field(r: &Resolved, args: &FieldArgs) -> Result<RunOutput, CliError> {
    let m = &r.magnet;
    if args.points < 2 || !(args.z_max > 0.0) {
        return Err(CliError::Config {
            path: "field".into(),
            msg: "need at least 2 points and a positive z-max".into(),
        });
    }
    let mut profile = Table::new("field_axis", &["h", "Bz", "dBzdz", "Bz_closed_form", "dBzdz_closed_form"]);
    let h0 = args.z_max / args.points as f64;
    let rows = (0..args.points)
        .into_par_iter()
        .map(|i| {
            let h = h0 + (args.z_max - h0) * i as f64 / (args.points - 1) as f64;
            let s = m.sample(&(m.face_center() + m.axis * h))?;
            Ok(row([
                h.into(),
                s.b.z.into(),
                s.dbz_dz().into(),
                m.on_axis_field(h).into(),
                m.on_axis_gradient(h).into(),
            ]))
        })
        .collect::<Result<Vec<_>, spinlev_core::Error>>()?;
    profile.rows = rows;

    let mut out = RunOutput::default();
    out.tables.push(profile);
    out.scripts.push(("plot_field.py".into(), plots::FIELD.into()));
    if args.map_points > 0 {
        let n = args.map_points.max(2);
        let face = m.face_center();
        let grid = RectGrid::linspace(
            Vector3::new(-2.0 * m.radius, 0.0, face.z + 0.2e-3),
            Vector3::new(2.0 * m.radius, 0.0, face.z + args.z_max),
            [n, 1, n],
        );
        let samples = field_map(m, &grid.points())?;
        let mut map = Table::new("field_map", &FIELD_MAP_HEADER);
        for s in &samples {
            map.push(row([
                s.position.x.into(),
                s.position.y.into(),
                s.position.z.into(),
                s.b.x.into(),
                s.b.y.into(),
                s.b.z.into(),
                s.dbz_dz().into(),
            ]));
        }
        out.tables.push(map);
    }
    out.summary = json!({
        "magnet": r.scenario.magnet,
        "radius": m.radius,
        "length": m.length,
        "remanence": m.remanence,
        "Bz_at_1mm": m.on_axis_field(1e-3),
        "dBzdz_at_1mm": m.on_axis_gradient(1e-3),
    });
    Ok(out)
}

// ---------------------------------------------------------------- spin

/// Ground-state populations against the angle between NV axis and field.
pub fn run_spin(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let n = s.theta_points;
    let mut jobs = Vec::new();
    for &intensity in &s.intensities {
        for i in 0..n {
            jobs.push((intensity, 0.5 * PI * i as f64 / (n - 1) as f64));
        }
    }
    let b = Vector3::new(0.0, 0.0, s.field);
    let rows = jobs
        .par_iter()
        .map(|&(intensity, theta)| {
            let orient = NVOrientation::new(theta, 0.0, 0);
            let h = build_hamiltonian(&b, &orient, &r.constants)?;
            let drive = LaserDrive {
                intensity,
                wavelength_polarizing: s.wavelength_polarizing,
            };
            let ss = seven_level_steady_state(&h, &drive, &r.rates, s.temperature, &r.constants)?;
            let rho = ss.spin_density()?;
            let p = rho.populations();
            let m = spinlev_core::nv_spin::lab_moment(&rho, &orient, &r.constants);
            Ok(row([
                theta.to_degrees().into(),
                intensity.into(),
                ss.populations[0].into(),
                ss.populations[1].into(),
                ss.populations[2].into(),
                p[0].into(),
                p[1].into(),
                p[2].into(),
                (m.dot(&b) / s.field).into(),
            ]))
        })
        .collect::<Result<Vec<_>, spinlev_core::Error>>()?;
    let mut t = Table::new(
        "spin_populations",
        &["theta_deg", "intensity", "p_e0", "p_e1", "p_e2", "p_plus1", "p_0", "p_minus1", "m_parallel"],
    );
    t.rows = rows;
    let mut out = RunOutput::default();
    out.tables.push(t);
    out.scripts.push(("plot_spin.py".into(), plots::SPIN.into()));
    out.summary = json!({ "field": s.field, "temperature": s.temperature, "rows": jobs.len() });
    Ok(out)
}

// ---------------------------------------------------------------- force

fn force_row(label: &str, gap: f64, power: f64, duty: f64, f: &ForceResult, osc: &OscillatorParams) -> Result<Vec<Cell>, CliError> {
    Ok(row([
        label.into(),
        gap.into(),
        power.into(),
        f.intensity.into(),
        duty.into(),
        f.f_th.into(),
        f.f_gl.into(),
        f.delta_f.into(),
        steady_state_amplitude(osc, f.delta_f, duty)?.into(),
        f.volume.into(),
        f.n_spins.into(),
    ]))
}

const FORCE_HEADER: [&str; 11] = [
    "magnet", "gap", "power_mw", "intensity", "duty", "f_th", "f_gl", "delta_f", "amplitude", "volume", "n_spins",
];

/// Ensemble forces at the scenario gap for each power and duty.
pub fn run_force(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let forces = s
        .powers
        .par_iter()
        .map(|&p| model_force(r, &r.magnet, s.gap, p, s.wavelength_polarizing))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("force", &FORCE_HEADER);
    for (p, f) in s.powers.iter().zip(&forces) {
        for &d in &s.duties {
            t.push(force_row(&s.magnet, s.gap, *p, d, f, &r.oscillator)?);
        }
    }
    let mut out = RunOutput::default();
    out.summary = json!({
        "gap": s.gap,
        "points": s.powers.iter().zip(&forces).map(|(p, f)| json!({
            "power_mw": p, "f_th": f.f_th, "f_gl": f.f_gl, "delta_f": f.delta_f,
        })).collect::<Vec<_>>(),
    });
    out.tables.push(t);
    Ok(out)
}

// ---------------------------------------------------------------- simulate

/// One trajectory at the first scenario power and duty, or at an explicit ΔF.
pub fn run_simulate(r: &Resolved, delta_f: Option<f64>) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let duty = s.duties[0];
    let (drive, f_th) = match delta_f {
        Some(df) => (
            DriveWaveform {
                rise_time: s.rise_time,
                ..DriveWaveform::square(0.0, df, duty, 1.0 / r.oscillator.f0)
            },
            0.0,
        ),
        None => {
            let f = model_force(r, &r.magnet, s.gap, s.powers[0], s.wavelength_polarizing)?;
            (drive_for(r, &f, duty), f.f_th)
        }
    };
    let ts = simulate(&r.oscillator, &drive, s.duration, &r.simulation_options(s.seed))?;
    let params = json!({
        "scenario": r.name,
        "oscillator": r.oscillator,
        "drive": drive,
        "duration": s.duration,
        "thermal_noise": s.thermal_noise,
        "f_th": f_th,
    });
    let mut out = RunOutput::default();
    out.summary = json!({
        "seed": s.seed,
        "delta_f": drive.delta(),
        "duty": duty,
        "samples": ts.len(),
        "amplitude_model": steady_state_amplitude(&r.oscillator, drive.delta().abs(), duty)?,
        "std": ts.skip_time(s.skip).variance().sqrt(),
    });
    out.series.push(("timeseries".into(), ts, params));
    Ok(out)
}

// ---------------------------------------------------------------- analyze

pub struct AnalyzeArgs<'a> {
    pub input: &'a Path,
    pub format: TimeSeriesFormat,
    pub duty: f64,
    pub oscillator: OscillatorParams,
    pub options: RecoveryOptions,
}

fn psd_table(name: &str, rec: &Recovery, f_max: f64) -> Table {
    let mut t = Table::new(name, &["f", "psd"]);
    for (f, v) in rec.psd.frequencies.iter().zip(&rec.psd.values) {
        if *f <= f_max {
            t.push(row([(*f).into(), (*v).into()]));
        }
    }
    t
}

fn recovery_json(rec: &Recovery) -> serde_json::Value {
    json!({
        "amplitude": rec.amplitude.amplitude,
        "amplitude_raw": rec.amplitude.amplitude_raw,
        "background": rec.amplitude.background,
        "band": rec.amplitude.band,
        "delta_f": rec.delta_f,
        "delta_f_raw": rec.delta_f_raw,
        "peak_to_floor": rec.peak_to_floor,
        "resolution_bandwidth": rec.psd.resolution_bandwidth,
        "segments": rec.psd.n_segments,
    })
}

/// Recovers ΔF from an imported displacement series.
pub fn run_analyze(args: &AnalyzeArgs) -> Result<RunOutput, CliError> {
    args.oscillator.validate()?;
    let ts = import_timeseries(args.input, &args.format)?;
    let rec = recover_force(&ts, &args.oscillator, args.duty, args.oscillator.f0, &args.options)?;
    let mut out = RunOutput::default();
    out.tables.push(psd_table("psd", &rec, f64::INFINITY));
    out.scripts.push(("plot_psd.py".into(), plots::PSD.into()));
    out.summary = json!({
        "input": args.input.display().to_string(),
        "samples": ts.len(),
        "sample_rate": ts.sample_rate,
        "duty": args.duty,
        "oscillator": args.oscillator,
        "options": args.options,
        "recovery": recovery_json(&rec),
    });
    Ok(out)
}

// ---------------------------------------------------------------- fig1c

/// Per-spin force against the NV-field angle for each intensity.
pub fn run_fig1c(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let model = r.spin_model();
    let b = Vector3::new(0.0, 0.0, s.field);
    let grad = axial_gradient(s.gradient);
    let n = s.theta_points;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let theta = 0.5 * PI * i as f64 / (n - 1) as f64;
            let orient = NVOrientation::new(theta, 0.0, 0);
            let mut cells = vec![Cell::Num(theta.to_degrees())];
            for &intensity in &s.intensities {
                let drive = LaserDrive {
                    intensity,
                    wavelength_polarizing: s.wavelength_polarizing,
                };
                cells.push(model.single_force(&b, &grad, &orient, &drive)?.z.into());
            }
            Ok(cells)
        })
        .collect::<Result<Vec<_>, spinlev_core::Error>>()?;
    let names: Vec<String> = std::iter::once("theta_deg".to_string())
        .chain(s.intensities.iter().map(|i| format!("f_I{i}")))
        .collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut t = Table::new("fig1c", &header);
    t.rows = rows;
    let at_zero: Vec<f64> = t.rows[0][1..].iter().filter_map(Cell::as_f64).collect();
    let mut out = RunOutput::default();
    out.summary = json!({
        "field": s.field,
        "gradient": s.gradient,
        "intensities": s.intensities,
        "force_at_theta0": at_zero,
    });
    out.tables.push(t);
    out.scripts.push(("plot_fig1c.py".into(), plots::FIG1C.into()));
    Ok(out)
}

// ---------------------------------------------------------------- fig2

struct Fig2Case {
    name: &'static str,
    power: f64,
    magnet: bool,
    polarizing: bool,
}

/// Driven runs, magnet-off and non-polarizing controls, with PSDs and a fold.
pub fn run_fig2(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let duty = s.duties[0];
    let hi = s.powers[0];
    let lo = *s.powers.last().unwrap();
    let mut cases = vec![Fig2Case { name: "driven", power: hi, magnet: true, polarizing: true }];
    if s.powers.len() > 1 {
        cases.push(Fig2Case { name: "driven_low", power: lo, magnet: true, polarizing: true });
    }
    cases.push(Fig2Case { name: "magnet_off", power: lo, magnet: false, polarizing: true });
    cases.push(Fig2Case { name: "control", power: hi, magnet: true, polarizing: false });

    let results = cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let period = 1.0 / r.oscillator.f0;
            let (force, drive) = if c.magnet {
                let f = model_force(r, &r.magnet, s.gap, c.power, c.polarizing)?;
                let d = drive_for(r, &f, duty);
                (Some(f), d)
            } else {
                (None, DriveWaveform::square(0.0, 0.0, duty, period))
            };
            let seed = derive_seed(s.seed, i);
            let (ts, rec) = simulate_and_recover(r, &drive, seed)?;
            Ok((force, drive, seed, ts, rec))
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut summary_t = Table::new(
        "fig2_summary",
        &[
            "case", "power_mw", "magnet", "polarizing", "seed", "f_th", "delta_f_model", "amplitude_model",
            "amplitude", "amplitude_raw", "delta_f_recovered", "delta_f_recovered_raw", "peak_to_floor",
        ],
    );
    let f_max = PSD_TABLE_SPAN * r.oscillator.f0;
    let mut psd = Table::new("fig2_psd", &["f"]);
    let first = &results[0].4.psd;
    for f in first.frequencies.iter().take_while(|f| **f <= f_max) {
        psd.rows.push(vec![(*f).into()]);
    }
    let mut cases_json = Vec::new();
    for (c, (force, drive, seed, _, rec)) in cases.iter().zip(&results) {
        let df = drive.delta().abs();
        let amp_model = steady_state_amplitude(&r.oscillator, df, duty)?;
        summary_t.push(row([
            c.name.into(),
            c.power.into(),
            c.magnet.into(),
            c.polarizing.into(),
            Cell::Int(*seed as i64),
            force.map_or(0.0, |f| f.f_th).into(),
            df.into(),
            amp_model.into(),
            rec.amplitude.amplitude.into(),
            rec.amplitude.amplitude_raw.into(),
            rec.delta_f.into(),
            rec.delta_f_raw.into(),
            rec.peak_to_floor.into(),
        ]));
        psd.header.push(format!("psd_{}", c.name));
        for (row, v) in psd.rows.iter_mut().zip(&rec.psd.values) {
            row.push((*v).into());
        }
        cases_json.push(json!({ "case": c.name, "seed": seed, "delta_f_model": df, "recovery": recovery_json(rec) }));
    }

    // Raw trace and period fold of the main driven run.
    let driven = &results[0].3;
    let off = &results.iter().zip(&cases).find(|(_, c)| c.name == "magnet_off").unwrap().0 .3;
    let mut trace = Table::new("fig2_trace", &["t", "z_driven", "z_magnet_off"]);
    let i0 = (s.skip * driven.sample_rate).round() as usize;
    let n = (s.trace_seconds * driven.sample_rate).round() as usize;
    for i in i0..(i0 + n).min(driven.len()) {
        trace.push(row([driven.time(i).into(), driven.samples[i].into(), off.samples[i].into()]));
    }
    let fold = segment_average(&driven.skip_time(s.skip), 1.0 / r.oscillator.f0)?;
    let correlation = sinusoid_correlation(&fold.waveform);
    let mut fold_t = Table::new("fig2_fold", &["phase", "waveform", "z_mean"]);
    for ((p, w), z) in fold.phase.iter().zip(&fold.waveform).zip(&fold.raw) {
        fold_t.push(row([(*p).into(), (*w).into(), (*z).into()]));
    }

    let mut out = RunOutput::default();
    out.summary = json!({
        "duty": duty,
        "duration": s.duration,
        "cases": cases_json,
        "fold_segments": fold.n_segments,
        "fold_sinusoid_correlation": correlation,
    });
    out.tables.extend([trace, fold_t, psd, summary_t]);
    out.scripts.push(("plot_fig2.py".into(), plots::FIG2.into()));
    Ok(out)
}

// ---------------------------------------------------------------- fig3

/// Model and simulation-recovered ΔF against power for each duty, plus a waterfall.
pub fn run_fig3(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let forces = s
        .powers
        .par_iter()
        .map(|&p| model_force(r, &r.magnet, s.gap, p, s.wavelength_polarizing))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..s.powers.len())
        .flat_map(|i| (0..s.duties.len()).map(move |j| (i, j)))
        .collect();
    let recs = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let drive = drive_for(r, &forces[i], s.duties[j]);
            Ok(simulate_and_recover(r, &drive, derive_seed(s.seed, k))?.1)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut t = Table::new(
        "fig3_force",
        &[
            "power_mw", "intensity", "duty", "seed", "f_th", "f_gl", "delta_f_model", "amplitude_model",
            "amplitude", "amplitude_raw", "delta_f_recovered", "delta_f_recovered_raw", "peak_to_floor",
        ],
    );
    for (k, (&(i, j), rec)) in jobs.iter().zip(&recs).enumerate() {
        let f = &forces[i];
        let d = s.duties[j];
        t.push(row([
            s.powers[i].into(),
            f.intensity.into(),
            d.into(),
            Cell::Int(derive_seed(s.seed, k) as i64),
            f.f_th.into(),
            f.f_gl.into(),
            f.delta_f.into(),
            steady_state_amplitude(&r.oscillator, f.delta_f, d)?.into(),
            rec.amplitude.amplitude.into(),
            rec.amplitude.amplitude_raw.into(),
            rec.delta_f.into(),
            rec.delta_f_raw.into(),
            rec.peak_to_floor.into(),
        ]));
    }

    // Waterfall at the duty closest to one half.
    let jw = (0..s.duties.len())
        .min_by(|a, b| (s.duties[*a] - 0.5).abs().total_cmp(&(s.duties[*b] - 0.5).abs()))
        .unwrap();
    let f0 = r.oscillator.f0;
    let mut wf = Table::new("fig3_waterfall", &["f"]);
    let psd0 = &recs[jw].psd;
    let idx: Vec<usize> = (0..psd0.frequencies.len())
        .filter(|&k| (psd0.frequencies[k] - f0).abs() <= 2.0)
        .collect();
    for &k in &idx {
        wf.rows.push(vec![psd0.frequencies[k].into()]);
    }
    for (&(i, j), rec) in jobs.iter().zip(&recs) {
        if j != jw {
            continue;
        }
        wf.header.push(format!("psd_P{}", s.powers[i]));
        for (row, &k) in wf.rows.iter_mut().zip(&idx) {
            row.push(rec.psd.values[k].into());
        }
    }

    let mut out = RunOutput::default();
    out.summary = json!({
        "gap": s.gap,
        "waterfall_duty": s.duties[jw],
        "delta_f_model": s.powers.iter().zip(&forces).map(|(p, f)| json!({"power_mw": p, "delta_f": f.delta_f})).collect::<Vec<_>>(),
    });
    out.tables.extend([t, wf]);
    out.scripts.push(("plot_fig3.py".into(), plots::FIG3.into()));
    Ok(out)
}

// ---------------------------------------------------------------- fig4

/// ΔF against gap for every magnet preset in the scenario.
pub fn run_fig4(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let power = s.powers[0];
    let duty = s.duties[0];
    let jobs: Vec<(usize, f64)> = (0..r.magnets.len())
        .flat_map(|m| s.gaps.iter().map(move |&g| (m, g)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(m, gap)| {
            let (name, magnet) = &r.magnets[m];
            let f = model_force(r, magnet, gap, power, s.wavelength_polarizing)?;
            let (h, b, g) = spot_sample(r, magnet, gap)?;
            Ok(row([
                name.as_str().into(),
                gap.into(),
                h.into(),
                b.into(),
                g.into(),
                f.f_th.into(),
                f.f_gl.into(),
                f.delta_f.into(),
                steady_state_amplitude(&r.oscillator, f.delta_f, duty)?.into(),
            ]))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(
        "fig4",
        &["magnet", "gap", "spot_height", "b_spot", "dbzdz_spot", "f_th", "f_gl", "delta_f", "amplitude"],
    );
    t.rows = rows;
    let mut out = RunOutput::default();
    out.summary = json!({
        "power_mw": power,
        "duty": duty,
        "magnets": r.magnets.iter().map(|(n, m)| json!({"name": n, "radius": m.radius, "length": m.length, "remanence": m.remanence})).collect::<Vec<_>>(),
    });
    out.tables.push(t);
    out.scripts.push(("plot_fig4.py".into(), plots::FIG4.into()));
    Ok(out)
}

// ---------------------------------------------------------------- sweep

/// Model grid over magnets, gaps, powers and duties.
pub fn run_sweep(r: &Resolved) -> Result<RunOutput, CliError> {
    let s = &r.scenario;
    let mut jobs = Vec::new();
    for m in 0..r.magnets.len() {
        for &g in &s.gaps {
            for &p in &s.powers {
                jobs.push((m, g, p));
            }
        }
    }
    let forces = jobs
        .par_iter()
        .map(|&(m, g, p)| model_force(r, &r.magnets[m].1, g, p, s.wavelength_polarizing))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("sweep", &FORCE_HEADER);
    for (&(m, g, p), f) in jobs.iter().zip(&forces) {
        for &d in &s.duties {
            t.push(force_row(&r.magnets[m].0, g, p, d, f, &r.oscillator)?);
        }
    }
    let mut out = RunOutput::default();
    out.summary = json!({ "points": t.rows.len() });
    out.tables.push(t);
    out.scripts.push(("plot_sweep.py".into(), plots::SWEEP.into()));
    Ok(out)
}
