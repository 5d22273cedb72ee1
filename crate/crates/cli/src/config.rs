//! TOML configuration: named presets plus scenario blocks that reference them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use spinlev_core::analysis::{RecoveryOptions, Window};
use spinlev_core::force_model::{DiamondSpec, ForceModel, IlluminationSpot, Quadrature, SpinModel};
use spinlev_core::mechanics::{OscillatorParams, SimulationOptions};
use spinlev_core::nv_spin::SevenLevelParams;
use spinlev_core::{CylindricalMagnet, PhysicalConstants};

use crate::CliError;

/// The shipped configuration, used when no `--config` is given.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub constants: PhysicalConstants,
    pub magnets: BTreeMap<String, MagnetPreset>,
    pub diamonds: BTreeMap<String, DiamondSpec>,
    pub spots: BTreeMap<String, IlluminationSpot>,
    pub rates: BTreeMap<String, SevenLevelParams>,
    pub oscillators: BTreeMap<String, OscillatorParams>,
    pub scenarios: BTreeMap<String, Scenario>,
}

/// Target on-axis field and gradient at `height` above the pole face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub length: f64,
    pub height: f64,
    pub field: f64,
    pub gradient: f64,
}

/// One of: explicit dimensions, a calibration target, or a scaled copy of another
/// preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagnetPreset {
    pub radius: Option<f64>,
    pub length: Option<f64>,
    pub remanence: Option<f64>,
    pub calibrate: Option<Calibration>,
    pub scale_of: Option<String>,
    pub diameter_factor: Option<f64>,
    pub pole_face_position: f64,
}

fn d_magnet() -> String {
    "small".into()
}
fn d_magnets() -> Vec<String> {
    vec!["small".into(), "large".into()]
}
fn d_name() -> String {
    "default".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub magnet: String,
    /// Presets compared in gap sweeps.
    pub magnets: Vec<String>,
    pub diamond: String,
    pub spot: String,
    pub rates: String,
    pub oscillator: String,
    /// Pole face to diamond bottom, m.
    pub gap: f64,
    pub gaps: Vec<f64>,
    /// Laser powers, mW.
    pub powers: Vec<f64>,
    pub duties: Vec<f64>,
    /// Single-NV intensities for the angle sweep, mW/mm².
    pub intensities: Vec<f64>,
    /// Field magnitude (T) and on-axis gradient (T/m) for the angle sweep.
    pub field: f64,
    pub gradient: f64,
    pub theta_points: usize,
    pub wavelength_polarizing: bool,
    /// Simulated time per run, s.
    pub duration: f64,
    pub seed: u64,
    pub temperature: f64,
    pub scaling_factor: f64,
    pub quadrature: Quadrature,
    pub sample_rate: f64,
    pub thermal_noise: bool,
    /// Drive switching time constant, s.
    pub rise_time: f64,
    pub segment_length: f64,
    /// Hz; unset means 5 resolution bandwidths.
    pub band_halfwidth: Option<f64>,
    pub window: Window,
    /// Transient discarded before analysis, s.
    pub skip: f64,
    /// Length of raw trace written by the time-domain figure, s.
    pub trace_seconds: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            magnet: d_magnet(),
            magnets: d_magnets(),
            diamond: d_name(),
            spot: d_name(),
            rates: d_name(),
            oscillator: d_name(),
            gap: 0.5e-3,
            gaps: (0..7).map(|i| 0.5e-3 + i as f64 * 1e-3).collect(),
            powers: vec![50.0],
            duties: vec![0.48],
            intensities: vec![0.0, 10.0, 30.0, 50.0],
            field: 0.63,
            gradient: -98.0,
            theta_points: 91,
            wavelength_polarizing: true,
            duration: 1200.0,
            seed: 1,
            temperature: 300.0,
            scaling_factor: spinlev_core::force_model::DEFAULT_SCALING_FACTOR,
            quadrature: Quadrature::default(),
            sample_rate: spinlev_core::mechanics::DEFAULT_SAMPLE_RATE,
            thermal_noise: true,
            rise_time: 0.0,
            segment_length: 100.0,
            band_halfwidth: None,
            window: Window::Hann,
            skip: 10.0,
            trace_seconds: 20.0,
        }
    }
}

/// A scenario with every preset reference replaced by its value.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub name: String,
    pub scenario: Scenario,
    pub constants: PhysicalConstants,
    pub magnet: CylindricalMagnet,
    /// Gap-sweep presets, in scenario order.
    pub magnets: Vec<(String, CylindricalMagnet)>,
    pub diamond: DiamondSpec,
    pub spot: IlluminationSpot,
    pub rates: SevenLevelParams,
    pub oscillator: OscillatorParams,
}

impl Resolved {
    pub fn spin_model(&self) -> SpinModel {
        SpinModel {
            params: self.rates,
            temperature: self.scenario.temperature,
            consts: self.constants,
        }
    }

    pub fn force_model(&self) -> ForceModel {
        ForceModel {
            spin: self.spin_model(),
            scaling_factor: self.scenario.scaling_factor,
            quadrature: self.scenario.quadrature,
        }
    }

    pub fn diamond_at(&self, gap: f64) -> DiamondSpec {
        self.diamond.with_gap(gap)
    }

    pub fn simulation_options(&self, seed: u64) -> SimulationOptions {
        SimulationOptions {
            sample_rate: self.scenario.sample_rate,
            thermal_noise: self.scenario.thermal_noise,
            seed,
            consts: self.constants,
            ..SimulationOptions::default()
        }
    }

    pub fn recovery_options(&self) -> RecoveryOptions {
        RecoveryOptions {
            segment_length: self.scenario.segment_length,
            window: self.scenario.window,
            band_halfwidth: self.scenario.band_halfwidth,
            skip: self.scenario.skip,
        }
    }
}

fn err(path: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        msg: msg.into(),
    }
}

impl Config {
    /// Parses TOML; errors carry the dotted path of the offending key.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| err("<root>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            err(path, e.into_inner().message().to_string())
        })
    }

    pub fn default_config() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("shipped config parses")
    }

    pub fn resolve_magnet(&self, name: &str, at: &str) -> Result<CylindricalMagnet, CliError> {
        self.resolve_magnet_inner(name, at, &mut BTreeSet::new())
    }

    fn resolve_magnet_inner(
        &self,
        name: &str,
        at: &str,
        seen: &mut BTreeSet<String>,
    ) -> Result<CylindricalMagnet, CliError> {
        let preset = self
            .magnets
            .get(name)
            .ok_or_else(|| err(at, format!("unknown magnet preset '{name}'")))?;
        let here = format!("magnets.{name}");
        if !seen.insert(name.to_string()) {
            return Err(err(&here, "scale_of forms a cycle"));
        }
        let explicit = [preset.radius, preset.length, preset.remanence];
        let kinds = [
            explicit.iter().any(Option::is_some),
            preset.calibrate.is_some(),
            preset.scale_of.is_some(),
        ];
        if kinds.iter().filter(|k| **k).count() != 1 {
            return Err(err(
                &here,
                "give exactly one of (radius, length, remanence), calibrate, or scale_of",
            ));
        }
        let magnet = if let Some(c) = preset.calibrate {
            CylindricalMagnet::calibrate(c.length, c.height, c.field, c.gradient)
                .map_err(|e| err(format!("{here}.calibrate"), e.to_string()))?
        } else if let Some(base) = &preset.scale_of {
            let factor = preset.diameter_factor.unwrap_or(2.0);
            if !(factor > 0.0) {
                return Err(err(format!("{here}.diameter_factor"), "must be positive"));
            }
            self.resolve_magnet_inner(base, &format!("{here}.scale_of"), seen)?
                .scaled_diameter(factor)
        } else {
            let [Some(r), Some(l), Some(b)] = explicit else {
                return Err(err(&here, "radius, length and remanence must all be given"));
            };
            CylindricalMagnet::new(r, l, b).map_err(|e| err(&here, e.to_string()))?
        };
        Ok(magnet.with_pole_face(preset.pole_face_position))
    }

    fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, at: String, kind: &str) -> Result<&'a T, CliError> {
        map.get(name)
            .ok_or_else(|| err(at, format!("unknown {kind} preset '{name}'")))
    }

    pub fn scenario(&self, name: &str) -> Result<Resolved, CliError> {
        let s = self
            .scenarios
            .get(name)
            .ok_or_else(|| err(format!("scenarios.{name}"), "no such scenario"))?
            .clone();
        let at = |key: &str| format!("scenarios.{name}.{key}");

        let magnet = self.resolve_magnet(&s.magnet, &at("magnet"))?;
        let magnets = s
            .magnets
            .iter()
            .enumerate()
            .map(|(i, m)| Ok((m.clone(), self.resolve_magnet(m, &format!("{}[{i}]", at("magnets")))?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let diamond = *Self::lookup(&self.diamonds, &s.diamond, at("diamond"), "diamond")?;
        let spot = *Self::lookup(&self.spots, &s.spot, at("spot"), "spot")?;
        let rates = *Self::lookup(&self.rates, &s.rates, at("rates"), "rates")?;
        let oscillator = *Self::lookup(&self.oscillators, &s.oscillator, at("oscillator"), "oscillator")?;

        diamond.validate().map_err(|e| err(format!("diamonds.{}", s.diamond), e.to_string()))?;
        spot.validate(&diamond).map_err(|e| err(format!("spots.{}", s.spot), e.to_string()))?;
        rates.validate().map_err(|e| err(format!("rates.{}", s.rates), e.to_string()))?;
        oscillator
            .validate()
            .map_err(|e| err(format!("oscillators.{}", s.oscillator), e.to_string()))?;

        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(err(at(key), format!("must be positive, got {v}")))
            }
        };
        positive("gap", s.gap)?;
        positive("duration", s.duration)?;
        positive("temperature", s.temperature)?;
        positive("scaling_factor", s.scaling_factor)?;
        positive("sample_rate", s.sample_rate)?;
        positive("segment_length", s.segment_length)?;
        positive("field", s.field)?;
        positive("trace_seconds", s.trace_seconds)?;
        if let Some(b) = s.band_halfwidth {
            positive("band_halfwidth", b)?;
        }
        if !(s.skip >= 0.0) || !(s.rise_time >= 0.0) {
            return Err(err(at("skip"), "skip and rise_time must be >= 0"));
        }
        for (key, list) in [
            ("gaps", &s.gaps),
            ("powers", &s.powers),
            ("duties", &s.duties),
            ("intensities", &s.intensities),
        ] {
            if list.is_empty() {
                return Err(err(at(key), "list must not be empty"));
            }
        }
        if s.magnets.is_empty() {
            return Err(err(at("magnets"), "list must not be empty"));
        }
        for (i, g) in s.gaps.iter().enumerate() {
            positive(&format!("gaps[{i}]"), *g)?;
        }
        for (i, p) in s.powers.iter().enumerate() {
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(err(format!("{}[{i}]", at("powers")), format!("must be >= 0, got {p}")));
            }
        }
        for (i, p) in s.intensities.iter().enumerate() {
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(err(format!("{}[{i}]", at("intensities")), format!("must be >= 0, got {p}")));
            }
        }
        for (i, d) in s.duties.iter().enumerate() {
            if !(*d > 0.0 && *d < 1.0) {
                return Err(err(format!("{}[{i}]", at("duties")), format!("must lie in (0, 1), got {d}")));
            }
        }
        if s.theta_points < 2 {
            return Err(err(at("theta_points"), "need at least 2 points"));
        }
        Ok(Resolved {
            name: name.to_string(),
            scenario: s,
            constants: self.constants,
            magnet,
            magnets,
            diamond,
            spot,
            rates,
            oscillator,
        })
    }

    /// Resolves every scenario, so a bad reference anywhere is reported up front.
    pub fn validate(&self) -> Result<(), CliError> {
        for name in self.magnets.keys() {
            self.resolve_magnet(name, &format!("magnets.{name}"))?;
        }
        for name in self.scenarios.keys() {
            self.scenario(name)?;
        }
        Ok(())
    }
}
