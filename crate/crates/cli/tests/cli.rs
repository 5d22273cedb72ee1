use std::fs;
use std::path::Path;
use std::process::Command;

use spinlev_cli::app::execute;
use spinlev_cli::config::{Config, DEFAULT_CONFIG};
use spinlev_cli::CliError;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinlev"))
}

fn config_path(e: &CliError) -> &str {
    match e {
        CliError::Config { path, .. } => path,
        other => panic!("expected a config error, got {other}"),
    }
}

fn with_edit(from: &str, to: &str) -> String {
    assert!(DEFAULT_CONFIG.contains(from), "{from}");
    DEFAULT_CONFIG.replacen(from, to, 1)
}

#[test]
fn shipped_config_validates() {
    let cfg = Config::default_config();
    cfg.validate().unwrap();
    for name in ["nominal", "fig1c", "fig2", "fig3", "fig4", "sweep"] {
        assert!(cfg.scenarios.contains_key(name), "{name}");
    }
    let r = cfg.scenario("fig4").unwrap();
    assert_eq!(r.magnets.len(), 2);
    assert!((r.magnets[1].1.radius / r.magnets[0].1.radius - 2.0).abs() < 1e-12);
}

#[test]
fn unknown_preset_reports_key_path() {
    let text = with_edit("magnets = [\"small\", \"large\"]\ngaps", "magnets = [\"small\", \"huge\"]\ngaps");
    let e = Config::parse(&text).unwrap().scenario("fig4").unwrap_err();
    assert_eq!(config_path(&e), "scenarios.fig4.magnets[1]");
    assert!(e.to_string().contains("huge"));

    let mut cfg = Config::default_config();
    cfg.scenarios.get_mut("nominal").unwrap().oscillator = "missing".into();
    let e = cfg.validate().unwrap_err();
    assert_eq!(config_path(&e), "scenarios.nominal.oscillator");
}

#[test]
fn invalid_values_report_key_path() {
    let text = with_edit("duties = [0.2, 0.48, 0.5, 0.8]", "duties = [0.2, 1.5]");
    let e = Config::parse(&text).unwrap().validate().unwrap_err();
    assert_eq!(config_path(&e), "scenarios.fig3.duties[1]");

    let text = with_edit("seed = 3", "seed = 3\ngap = -1e-3");
    let e = Config::parse(&text).unwrap().validate().unwrap_err();
    assert_eq!(config_path(&e), "scenarios.fig3.gap");

    let text = with_edit("[scenarios.fig3]", "[scenarios.fig3]\npowers = []");
    assert!(Config::parse(&text).is_err(), "duplicate key must not parse");

    let text = with_edit("seed = 2", "seed = 2\nwidgets = 1");
    let e = Config::parse(&text).unwrap_err();
    assert!(config_path(&e).starts_with("scenarios.fig2"), "{e}");
    assert!(e.to_string().contains("widgets"));

    let text = with_edit("q = 55.0", "q = \"high\"");
    let e = Config::parse(&text).unwrap_err();
    assert_eq!(config_path(&e), "oscillators.default.q");
}

#[test]
fn magnet_preset_kinds_are_exclusive() {
    let text = with_edit("diameter_factor = 2.0", "diameter_factor = 2.0\nradius = 1e-3");
    let e = Config::parse(&text).unwrap().validate().unwrap_err();
    assert_eq!(config_path(&e), "magnets.large");

    let text = with_edit("scale_of = \"small\"", "scale_of = \"large\"");
    let e = Config::parse(&text).unwrap().validate().unwrap_err();
    assert!(e.to_string().contains("cycle"));
}

fn file_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn rerun_is_bit_exact_and_manifest_lists_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = |dir: &Path, threads: &str| {
        vec![
            "spinlev".to_string(),
            "--out-dir".into(),
            dir.display().to_string(),
            "--threads".into(),
            threads.into(),
            "--duration".into(),
            "60".into(),
            "simulate".into(),
        ]
    };
    let ma = execute(args(&a, "1")).unwrap();
    let mb = execute(args(&b, "3")).unwrap();
    assert_eq!(file_bytes(&a), file_bytes(&b));
    assert_eq!(ma.config_sha256, mb.config_sha256);
    assert_eq!(ma.seed, Some(1));
    let names: Vec<_> = ma.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(names, ["timeseries.csv", "timeseries.meta.json"]);
    for o in &ma.outputs {
        let bytes = fs::read(a.join(&o.file)).unwrap();
        assert_eq!(o.sha256, spinlev_cli::output::sha256_hex(&bytes));
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["scenario"], "nominal");
    assert_eq!(manifest["config"], DEFAULT_CONFIG);

    // A different seed changes the trajectory.
    let c = tmp.path().join("c");
    let mut other = args(&c, "1");
    other.insert(1, "--seed".into());
    other.insert(2, "5".into());
    execute(other).unwrap();
    assert_ne!(file_bytes(&a), file_bytes(&c));
}

#[test]
fn simulate_then_analyze_recovers_injected_force() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().display().to_string();
    execute(["spinlev", "--out-dir", &dir, "--duration", "400", "simulate", "--delta-f", "2e-9"]).unwrap();
    let input = tmp.path().join("timeseries.csv");
    let out = tmp.path().join("analysis");
    let m = execute([
        "spinlev".to_string(),
        "--out-dir".into(),
        out.display().to_string(),
        "analyze".into(),
        input.display().to_string(),
        "--duty".into(),
        "0.48".into(),
        "--segment-length".into(),
        "50".into(),
    ])
    .unwrap();
    let df = m.summary["recovery"]["delta_f"].as_f64().unwrap();
    assert!((df / 2e-9 - 1.0).abs() < 0.15, "{df}");
    assert!(out.join("psd.csv").exists());
}

#[test]
fn figure_commands_write_tables_and_scripts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().display().to_string();
    let m = execute(["spinlev", "--out-dir", &dir, "fig1c"]).unwrap();
    let files: Vec<_> = m.outputs.iter().map(|o| o.file.as_str()).collect();
    assert_eq!(files, ["fig1c.csv", "plot_fig1c.py"]);
    let text = fs::read_to_string(tmp.path().join("fig1c.csv")).unwrap();
    assert!(text.starts_with("theta_deg,f_I0,f_I10,f_I30,f_I50\n"));
    assert_eq!(text.lines().count(), 92);

    let f0 = m.summary["force_at_theta0"].as_array().unwrap();
    let thermal = f0[0].as_f64().unwrap();
    let pumped = f0[3].as_f64().unwrap();
    assert!(thermal < 0.0, "thermal force points toward larger |B|, i.e. down");
    assert!(pumped.abs() < 0.2 * thermal.abs());
}

#[test]
fn field_map_has_documented_header() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().display().to_string();
    execute(["spinlev", "--out-dir", &dir, "field", "--points", "20", "--map-points", "4"]).unwrap();
    let text = fs::read_to_string(tmp.path().join("field_map.csv")).unwrap();
    assert!(text.starts_with("x,y,z,Bx,By,Bz,dBzdz\n"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = bin().args(["--out-dir"]).arg(tmp.path()).arg("force").output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, DEFAULT_CONFIG.replace("[scenarios.nominal]", "[scenarios.nominal]\nspot = \"nope\"")).unwrap();
    let bad = bin().arg("--config").arg(&cfg).arg("--out-dir").arg(tmp.path()).arg("force").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("scenarios.nominal.spot"), "{stderr}");

    // Simulating for under ten oscillation periods is a numerical failure.
    let short = bin().args(["--duration", "0.1", "--out-dir"]).arg(tmp.path()).arg("simulate").output().unwrap();
    assert_eq!(short.status.code(), Some(3));

    let missing = bin().arg("--out-dir").arg(tmp.path()).args(["analyze", "/nonexistent/series.csv"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let nan = tmp.path().join("nan.csv");
    fs::write(&nan, "t,z\n0,0\n0.5,NaN\n1,0\n").unwrap();
    let parse = bin().arg("--out-dir").arg(tmp.path()).arg("analyze").arg(&nan).output().unwrap();
    assert_eq!(parse.status.code(), Some(2));

    let usage = bin().arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
