//! Command-line surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use spinlev_core::analysis::{TimeSeriesFormat, Window};

use crate::config::{Config, DEFAULT_CONFIG};
use crate::output::{write_run, Manifest, RunOutput};
use crate::runs::{self, AnalyzeArgs, FieldArgs};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "spinlev", version, about = "Spin-force levitation simulator")]
pub struct Cli {
    /// TOML config; the shipped defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Scenario name; defaults to the figure name, or `nominal`.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Overrides the simulated duration, s.
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// On-axis field profile and an optional x-z field map.
    Field {
        /// m above the pole face.
        #[arg(long, default_value_t = 20e-3)]
        z_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        map_points: usize,
    },
    /// Ground-state populations against NV-field angle.
    Spin,
    /// Ensemble forces at the scenario gap.
    Force,
    /// One Langevin trajectory, written as CSV plus sidecar.
    Simulate {
        /// Inject this force step (N) instead of the modeled one.
        #[arg(long)]
        delta_f: Option<f64>,
        #[arg(long)]
        no_noise: bool,
    },
    /// Force recovery from a displacement series.
    Analyze(AnalyzeCmd),
    Fig1c,
    Fig2,
    Fig3,
    Fig4,
    Sweep,
}

#[derive(Debug, Args)]
pub struct AnalyzeCmd {
    /// Two-column CSV (t, z).
    pub input: PathBuf,
    #[arg(long)]
    pub segment_length: Option<f64>,
    #[arg(long)]
    pub band_halfwidth: Option<f64>,
    #[arg(long)]
    pub window: Option<Window>,
    #[arg(long)]
    pub duty: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub f0: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Initial transient to discard, s.
    #[arg(long)]
    pub skip: Option<f64>,
    #[arg(long)]
    pub no_header: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Field { .. } => "field",
            Command::Spin => "spin",
            Command::Force => "force",
            Command::Simulate { .. } => "simulate",
            Command::Analyze(_) => "analyze",
            Command::Fig1c => "fig1c",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Sweep => "sweep",
        }
    }

    fn default_scenario(&self) -> &'static str {
        match self {
            Command::Fig1c | Command::Fig2 | Command::Fig3 | Command::Fig4 | Command::Sweep => self.name(),
            _ => "nominal",
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<(String, Config), CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let cfg = Config::parse(&text)?;
    Ok((text, cfg))
}

/// Parses `args` (including the program name), runs the command and writes outputs.
pub fn execute<I, T>(args: I) -> Result<Manifest, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Config {
        path: "<args>".into(),
        msg: e.to_string(),
    })?;
    let argv: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    run(&cli, &argv)
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<Manifest, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config {
            path: "--threads".into(),
            msg: e.to_string(),
        })?;
    pool.install(|| run_in_pool(cli, argv))
}

fn run_in_pool(cli: &Cli, argv: &[String]) -> Result<Manifest, CliError> {
    let (text, cfg) = read_config(cli.config.as_deref())?;
    cfg.validate()?;
    let name = cli.scenario.clone().unwrap_or_else(|| cli.command.default_scenario().to_string());
    let mut r = cfg.scenario(&name)?;
    if let Some(seed) = cli.seed {
        r.scenario.seed = seed;
    }
    if let Some(d) = cli.duration {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::Config {
                path: "--duration".into(),
                msg: format!("must be positive, got {d}"),
            });
        }
        r.scenario.duration = d;
    }

    let out: RunOutput = match &cli.command {
        Command::Field { z_max, points, map_points } => runs::run_field(
            &r,
            &FieldArgs {
                z_max: *z_max,
                points: *points,
                map_points: *map_points,
            },
        )?,
        Command::Spin => runs::run_spin(&r)?,
        Command::Force => runs::run_force(&r)?,
        Command::Simulate { delta_f, no_noise } => {
            if *no_noise {
                r.scenario.thermal_noise = false;
            }
            runs::run_simulate(&r, *delta_f)?
        }
        Command::Analyze(a) => {
            let mut osc = r.oscillator;
            osc.mass = a.mass.unwrap_or(osc.mass);
            osc.f0 = a.f0.unwrap_or(osc.f0);
            osc.q = a.q.unwrap_or(osc.q);
            let mut options = r.recovery_options();
            options.segment_length = a.segment_length.unwrap_or(options.segment_length);
            options.band_halfwidth = a.band_halfwidth.or(options.band_halfwidth);
            options.window = a.window.unwrap_or(options.window);
            options.skip = a.skip.unwrap_or(options.skip);
            runs::run_analyze(&AnalyzeArgs {
                input: &a.input,
                format: TimeSeriesFormat {
                    has_header: !a.no_header,
                    ..TimeSeriesFormat::default()
                },
                duty: a.duty.unwrap_or(r.scenario.duties[0]),
                oscillator: osc,
                options,
            })?
        }
        Command::Fig1c => runs::run_fig1c(&r)?,
        Command::Fig2 => runs::run_fig2(&r)?,
        Command::Fig3 => runs::run_fig3(&r)?,
        Command::Fig4 => runs::run_fig4(&r)?,
        Command::Sweep => runs::run_sweep(&r)?,
    };
    let seed = matches!(cli.command, Command::Simulate { .. } | Command::Fig2 | Command::Fig3).then_some(r.scenario.seed);
    write_run(&cli.out_dir, cli.command.name(), argv, Some(&name), seed, &text, &out)
}
