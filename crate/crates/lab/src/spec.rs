// SPDX-License-Identifier: Apache-2.0

//! Experiment specifications, read from TOML.
//!
//! ```toml
//! name = "weight-law"
//! seed = 42
//! output_dir = "runs/weight-law"
//!
//! [calibration]
//! preset = "paper2024"
//! overrides = { weight_field_slope = -0.6 }
//!
//! [protocol]
//! kind = "nucleation_sweep"
//! repeats = 100
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skyrmion_core::analysis::EnergyPreset;
use skyrmion_core::device::DeviceCalibration;
use skyrmion_core::nucleation::MIN_TRIALS;
use skyrmion_core::readout::{MtjConfig, ReadoutNoise};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub calibration: CalibrationSpec,
    pub protocol: Protocol,
}

/// A named preset with optional per-field overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    /// Defaults to the protocol's natural preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub overrides: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    NucleationSweep(NucleationSweep),
    DetectionRun(DetectionRun),
    Fig4Twotrack(Fig4TwoTrack),
    MontecarloSigma(MontecarloSigma),
    Pareto(Pareto),
    Netsim(Netsim),
}

impl Protocol {
    pub fn kind(&self) -> &'static str {
        match self {
            Protocol::NucleationSweep(_) => "nucleation_sweep",
            Protocol::DetectionRun(_) => "detection_run",
            Protocol::Fig4Twotrack(_) => "fig4_twotrack",
            Protocol::MontecarloSigma(_) => "montecarlo_sigma",
            Protocol::Pareto(_) => "pareto",
            Protocol::Netsim(_) => "netsim",
        }
    }

    /// Preset used when the spec names none.
    pub fn default_preset(&self) -> &'static str {
        match self {
            Protocol::Fig4Twotrack(_) => DeviceCalibration::PAPER2024_TWOTRACK,
            _ => DeviceCalibration::PAPER2024,
        }
    }
}

/// Cumulative nucleation traces over field, current and duration series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NucleationSweep {
    /// mT, swept at the reference current and duration.
    pub fields: Vec<f64>,
    /// GA/m^2, swept at the reference field and duration.
    pub currents: Vec<f64>,
    /// ns, swept at the reference field and current.
    pub durations: Vec<f64>,
    pub reference_field: f64,
    pub reference_current: f64,
    pub reference_duration: f64,
    pub pulses: u32,
    pub repeats: u32,
    pub p_bar: f64,
}

impl Default for NucleationSweep {
    fn default() -> Self {
        Self {
            fields: (0..=12).map(|k| 20.0 + 0.5 * f64::from(k)).collect(),
            currents: vec![160.0, 171.0, 180.0],
            durations: vec![40.0, 50.0, 60.0],
            reference_field: 24.0,
            reference_current: 171.0,
            reference_duration: 50.0,
            pulses: 20,
            repeats: 100,
            p_bar: 0.4,
        }
    }
}

/// Post-averaging readout noise; both terms off means noise-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// nV
    pub sigma_meas: f64,
    pub per_skyrmion: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        let n = ReadoutNoise::default();
        Self {
            sigma_meas: n.sigma_meas,
            per_skyrmion: n.per_skyrmion,
        }
    }
}

impl NoiseSpec {
    pub fn off() -> Self {
        Self {
            sigma_meas: 0.0,
            per_skyrmion: false,
        }
    }

    pub fn to_noise(self) -> Option<ReadoutNoise> {
        (self.sigma_meas > 0.0 || self.per_skyrmion).then_some(ReadoutNoise {
            sigma_meas: self.sigma_meas,
            per_skyrmion: self.per_skyrmion,
        })
    }
}

/// One track measured through baseline, pulsing, stability, reset and post
/// phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionRun {
    /// Skyrmions per pulse; when absent the weight follows from `field`
    /// and the pulse shape.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    /// mT
    pub field: f64,
    pub current_density: f64,
    pub duration: f64,
    pub pulses: u32,
    pub baseline: u32,
    pub stability: u32,
    pub post: u32,
    pub p_bar: f64,
    pub noise: NoiseSpec,
    /// uA
    pub read_current: f64,
    /// nV per sample index.
    pub drift_per_index: f64,
    /// nV
    pub offset: f64,
    /// Overrides the zone capacity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
}

impl Default for DetectionRun {
    fn default() -> Self {
        Self {
            weight: None,
            field: 24.0,
            current_density: 150.0,
            duration: 50.0,
            pulses: 20,
            baseline: 10,
            stability: 10,
            post: 10,
            p_bar: 0.4,
            noise: NoiseSpec::default(),
            read_current: 100.0,
            drift_per_index: 0.0,
            offset: 0.0,
            capacity: None,
        }
    }
}

/// The two-track demonstration: pulses on track 1, then on track 2, then a
/// field reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4TwoTrack {
    /// Skyrmions per pulse at the reference duration.
    pub weights: [f64; 2],
    pub pulses: [u32; 2],
    /// ns per track.
    pub durations: [f64; 2],
    pub current_density: f64,
    pub p_bar: f64,
    pub noise: NoiseSpec,
    pub baseline: u32,
    pub stability: u32,
    pub post: u32,
}

impl Default for Fig4TwoTrack {
    fn default() -> Self {
        Self {
            weights: [0.16, 0.16],
            pulses: [30, 30],
            durations: [50.0, 50.0],
            current_density: 116.0,
            p_bar: 0.4,
            noise: NoiseSpec::default(),
            baseline: 20,
            stability: 20,
            post: 10,
        }
    }
}

/// Spread of `N_sk / N_pulse` at unit weight against `sqrt(p_bar / N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MontecarloSigma {
    /// Probabilities `p(1) = 1 - p_bar`.
    pub p_one: Vec<f64>,
    pub n_pulses: Vec<u32>,
    pub trials: u32,
}

impl Default for MontecarloSigma {
    fn default() -> Self {
        Self {
            p_one: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            n_pulses: vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000],
            trials: 10_000,
        }
    }
}

/// Precision against energy of an `m`-synapse sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Pareto {
    pub m: u32,
    pub p_bar: f64,
    pub n_pulse_max: u32,
    pub presets: Vec<EnergyPreset>,
}

impl Default for Pareto {
    fn default() -> Self {
        Self {
            m: 10,
            p_bar: 0.4,
            n_pulse_max: 100,
            presets: EnergyPreset::ALL.to_vec(),
        }
    }
}

/// Numbers given inline or as a path to a headerless CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource<T> {
    Inline(Vec<Vec<T>>),
    File(PathBuf),
}

impl<T> Default for MatrixSource<T> {
    fn default() -> Self {
        MatrixSource::Inline(Vec::new())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetMode {
    #[default]
    Expected,
    Stochastic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetActivation {
    #[default]
    Identity,
    Hall,
    Mtj,
}

/// Inference of one layer through differential crossbar columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Netsim {
    /// Inputs by outputs.
    pub weights: MatrixSource<f64>,
    /// One row of pulse counts per sample.
    pub inputs: MatrixSource<u32>,
    pub states: u32,
    /// Skyrmions per pulse of the largest weight.
    pub device_max: f64,
    pub mode: NetMode,
    pub activation: NetActivation,
    pub mtj: MtjConfig,
    pub p_bar: f64,
    /// Stochastic runs per sample.
    pub trials: u32,
}

impl Default for Netsim {
    fn default() -> Self {
        Self {
            weights: MatrixSource::default(),
            inputs: MatrixSource::default(),
            states: 15,
            device_max: 1.0,
            mode: NetMode::Expected,
            activation: NetActivation::Identity,
            mtj: MtjConfig::default(),
            p_bar: 0.4,
            trials: 1,
        }
    }
}

impl ExperimentSpec {
    /// Parses a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| LabError::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let spec: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| LabError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec file; relative matrix paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
        let mut spec = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            spec.resolve_paths(dir);
        }
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Protocol::Netsim(n) = &mut self.protocol {
            if let MatrixSource::File(p) = &mut n.weights {
                *p = base.join(&*p);
            }
            if let MatrixSource::File(p) = &mut n.inputs {
                *p = base.join(&*p);
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Parse(e.to_string()))
    }

    /// The preset with overrides applied, validated.
    pub fn resolve_calibration(&self) -> Result<DeviceCalibration> {
        let name = self
            .calibration
            .preset
            .as_deref()
            .unwrap_or_else(|| self.protocol.default_preset());
        let base = DeviceCalibration::preset(name)
            .ok_or_else(|| LabError::validation("calibration.preset", format!("unknown preset `{name}`")))?;
        let mut table = match toml::Value::try_from(&base) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("calibration serializes to a table"),
        };
        for (key, value) in &self.calibration.overrides {
            if !table.contains_key(key) {
                return Err(LabError::validation(
                    format!("calibration.overrides.{key}"),
                    "not a calibration field",
                ));
            }
            table.insert(key.clone(), value.clone());
        }
        let cal: DeviceCalibration = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| LabError::validation("calibration.overrides", e.message()))?;
        cal.validate().map_err(|e| LabError::validation("calibration", e))?;
        Ok(cal)
    }

    /// Checks every field that the core types do not check themselves.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(LabError::validation("name", "must be non-empty"));
        }
        self.resolve_calibration()?;
        match &self.protocol {
            Protocol::NucleationSweep(p) => {
                probability("protocol.p_bar", p.p_bar)?;
                at_least("protocol.pulses", p.pulses, 2)?;
                at_least("protocol.repeats", p.repeats, 1)?;
                if p.fields.len() < 2 {
                    return Err(LabError::validation("protocol.fields", "need at least 2 fields"));
                }
            }
            Protocol::DetectionRun(p) => {
                probability("protocol.p_bar", p.p_bar)?;
                noise("protocol.noise", &p.noise)?;
                if let Some(w) = p.weight {
                    non_negative("protocol.weight", w)?;
                }
                if p.capacity == Some(0) {
                    return Err(LabError::validation("protocol.capacity", "must be >= 1"));
                }
            }
            Protocol::Fig4Twotrack(p) => {
                probability("protocol.p_bar", p.p_bar)?;
                noise("protocol.noise", &p.noise)?;
                for (k, w) in p.weights.iter().enumerate() {
                    non_negative(&format!("protocol.weights[{k}]"), *w)?;
                }
            }
            Protocol::MontecarloSigma(p) => {
                for (k, q) in p.p_one.iter().enumerate() {
                    probability(&format!("protocol.p_one[{k}]"), *q)?;
                }
                if let Some(k) = p.n_pulses.iter().position(|&n| n == 0) {
                    return Err(LabError::validation(format!("protocol.n_pulses[{k}]"), "must be >= 1"));
                }
                at_least("protocol.trials", p.trials, MIN_TRIALS)?;
            }
            Protocol::Pareto(p) => {
                probability("protocol.p_bar", p.p_bar)?;
                at_least("protocol.m", p.m, 1)?;
                at_least("protocol.n_pulse_max", p.n_pulse_max, 1)?;
            }
            Protocol::Netsim(p) => {
                probability("protocol.p_bar", p.p_bar)?;
                at_least("protocol.states", p.states, 2)?;
                at_least("protocol.trials", p.trials, 1)?;
                if !(p.device_max > 0.0) {
                    return Err(LabError::validation("protocol.device_max", "must be > 0"));
                }
                p.mtj.validate().map_err(|e| LabError::validation("protocol.mtj", e))?;
            }
        }
        Ok(())
    }
}

fn probability(path: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(LabError::validation(path, format!("{p} is not in [0, 1]")))
    }
}

fn non_negative(path: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(LabError::validation(path, format!("{x} must be finite and >= 0")))
    }
}

fn at_least(path: &str, n: u32, min: u32) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(LabError::validation(path, format!("{n} is below the minimum {min}")))
    }
}

fn noise(path: &str, n: &NoiseSpec) -> Result<()> {
    if n.sigma_meas >= 0.0 && n.sigma_meas.is_finite() {
        Ok(())
    } else {
        Err(LabError::validation(
            format!("{path}.sigma_meas"),
            "must be finite and >= 0",
        ))
    }
}

/// Sets a dotted key such as `protocol.p_bar` in a raw spec table.
pub fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(LabError::validation(key, "empty key segment"));
        }
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| LabError::validation(key, format!("`{part}` is not a table")))?;
    }
    Err(LabError::validation(key, "empty key"))
}

/// Parses a command-line value as a TOML literal, falling back to a string.
pub fn parse_value(text: &str) -> toml::Value {
    format!("v = {text}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}
