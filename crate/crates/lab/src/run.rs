// SPDX-License-Identifier: Apache-2.0

//! Experiment execution and run-directory layout.
//!
//! A run directory holds `config.toml` (the resolved spec), the protocol's
//! CSV files, `summary.json` and `manifest.json`. Nothing time-dependent is
//! written, so a rerun with the same seed is byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use skyrmion_core::analysis::{pareto_curve, sum_energy, EnergyModel};
use skyrmion_core::crossbar::{run_fig4_protocol, CrossbarConfig, Fig4Schedule, InputVector, ReadoutMode};
use skyrmion_core::device::{synaptic_weight, DeviceCalibration, FieldSetting, PulseTrain};
use skyrmion_core::linear_fit;
use skyrmion_core::netmap::{infer, quantize, Activation, InferMode, Matrix, Polarity};
use skyrmion_core::nucleation::{
    analytic_sigma, cumulative, fit_weight, monte_carlo_sigma, nucleation_trace, StochasticModel,
};
use skyrmion_core::readout::{
    drift_correct, measure_protocol, MeasurementTrace, Phase, ProtocolSpec, ProtocolStep, SynapseTrack,
};
use skyrmion_core::rng::Streams;
use skyrmion_core::transport::{DetectionZone, Notch};

use crate::error::{LabError, Result};
use crate::matrix::read_matrix;
use crate::spec::{
    DetectionRun, ExperimentSpec, Fig4TwoTrack, MatrixSource, MontecarloSigma, NetActivation, NetMode, Netsim,
    NucleationSweep, Pareto, Protocol,
};

pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const NUCLEATION_TRACES: &str = "nucleation_traces.csv";
pub const NUCLEATION_SLOPES: &str = "nucleation_slopes.csv";
pub const DETECTION_TRACE: &str = "detection_trace.csv";
pub const TWOTRACK_TRACE: &str = "twotrack_trace.csv";
pub const SIGMA_TABLE: &str = "sigma.csv";
pub const PARETO_TABLE: &str = "pareto.csv";
pub const NETSIM_OUTPUTS: &str = "netsim_outputs.csv";
pub const NETSIM_SCHEDULE: &str = "programming_schedule.json";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub summary: Value,
}

/// Files written into one run directory.
struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, text).map_err(LabError::io(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        write_csv(&path, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(LabError::csv(path))?;
    for row in rows {
        w.serialize(row).map_err(LabError::csv(path))?;
    }
    w.flush().map_err(LabError::io(path))
}

/// Directory a spec writes to when none is given.
pub fn default_output_dir(spec: &ExperimentSpec) -> PathBuf {
    spec.output_dir
        .clone()
        .unwrap_or_else(|| Path::new("runs").join(&spec.name))
}

/// Runs a spec and writes its run directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let cal = spec.resolve_calibration()?;
    let dir = default_output_dir(spec);
    fs::create_dir_all(&dir).map_err(LabError::io(&dir))?;
    let mut out = Artifacts {
        dir: dir.clone(),
        files: Vec::new(),
    };

    let snapshot = snapshot(spec)?;
    out.text(CONFIG_FILE, &snapshot.to_toml()?)?;

    let streams = Streams::new(spec.seed);
    let results = match &snapshot.protocol {
        Protocol::NucleationSweep(p) => nucleation_sweep(&cal, p, streams, &mut out)?,
        Protocol::DetectionRun(p) => detection_run(&cal, p, streams, &mut out)?,
        Protocol::Fig4Twotrack(p) => fig4_twotrack(&cal, p, streams, &mut out)?,
        Protocol::MontecarloSigma(p) => montecarlo_sigma(p, streams, &mut out)?,
        Protocol::Pareto(p) => pareto(p, &mut out)?,
        Protocol::Netsim(p) => netsim(&cal, p, streams, &mut out)?,
    };
    let summary = json!({
        "name": spec.name,
        "protocol": spec.protocol.kind(),
        "seed": spec.seed,
        "results": results,
    });
    out.json(SUMMARY_FILE, &summary)?;

    let mut files = Vec::with_capacity(out.files.len());
    for name in &out.files {
        let path = out.path(name);
        let bytes = fs::metadata(&path).map_err(LabError::io(&path))?.len();
        files.push(json!({ "path": name, "bytes": bytes }));
    }
    let manifest = json!({
        "name": spec.name,
        "protocol": spec.protocol.kind(),
        "seed": spec.seed,
        "versions": {
            "skyrmion-core": skyrmion_core::VERSION,
            "skyrmion-lab": env!("CARGO_PKG_VERSION"),
        },
        "files": files,
    });
    out.json(MANIFEST_FILE, &manifest)?;
    Ok(RunOutput { dir, summary })
}

/// The spec as it will run: explicit preset, matrices inlined, no output
/// directory.
fn snapshot(spec: &ExperimentSpec) -> Result<ExperimentSpec> {
    let mut snap = spec.clone();
    snap.output_dir = None;
    if snap.calibration.preset.is_none() {
        snap.calibration.preset = Some(snap.protocol.default_preset().to_string());
    }
    if let Protocol::Netsim(n) = &mut snap.protocol {
        n.weights = MatrixSource::Inline(load_source(&n.weights, "protocol.weights")?);
        n.inputs = MatrixSource::Inline(load_source(&n.inputs, "protocol.inputs")?);
    }
    Ok(snap)
}

fn load_source<T: serde::de::DeserializeOwned + Clone>(src: &MatrixSource<T>, path: &str) -> Result<Vec<Vec<T>>> {
    let rows = match src {
        MatrixSource::Inline(rows) => rows.clone(),
        MatrixSource::File(file) => read_matrix(file)?,
    };
    if rows.is_empty() {
        return Err(LabError::validation(path, "no rows"));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct TraceRow {
    series: &'static str,
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    j_ga_m2: f64,
    t_ns: f64,
    repeat: u32,
    n_pulses: u32,
    n_sk: u64,
}

#[derive(Serialize)]
struct SlopeRow {
    series: &'static str,
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    j_ga_m2: f64,
    t_ns: f64,
    weight: f64,
    repeat: u32,
    slope: f64,
    r_squared: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// `(h_z mT, J GA/m^2, t ns)`
type ControlPoint = (f64, f64, f64);

fn nucleation_sweep(
    cal: &DeviceCalibration,
    p: &NucleationSweep,
    streams: Streams,
    out: &mut Artifacts,
) -> Result<Value> {
    let model = StochasticModel::new(p.p_bar)?;
    let series: [(&str, Vec<ControlPoint>); 3] = [
        (
            "field",
            p.fields
                .iter()
                .map(|&h| (h, p.reference_current, p.reference_duration))
                .collect(),
        ),
        (
            "current",
            p.currents
                .iter()
                .map(|&j| (p.reference_field, j, p.reference_duration))
                .collect(),
        ),
        (
            "duration",
            p.durations
                .iter()
                .map(|&t| (p.reference_field, p.reference_current, t))
                .collect(),
        ),
    ];

    let mut traces = Vec::new();
    let mut slopes = Vec::new();
    let mut points = Vec::new();
    let mut field_means = Vec::new();
    for (s, (name, grid)) in series.iter().enumerate() {
        for (k, &(h_z, j, t)) in grid.iter().enumerate() {
            let pulse = PulseTrain::forward(1, j, t)?;
            let w = synaptic_weight(cal, FieldSetting::new(h_z), &pulse)?;
            let point_streams = streams.child(s as u64).child(k as u64);
            let mut fitted = Vec::with_capacity(p.repeats as usize);
            for r in 0..p.repeats {
                let mut rng = point_streams.stream(u64::from(r));
                let events = nucleation_trace(w, &model, p.pulses, &mut rng)?;
                let cum = cumulative(&events);
                for &(n_pulses, n_sk) in &cum {
                    traces.push(TraceRow {
                        series: name,
                        h_z_mt: h_z,
                        j_ga_m2: j,
                        t_ns: t,
                        repeat: r,
                        n_pulses: n_pulses as u32,
                        n_sk: n_sk as u64,
                    });
                }
                let fit = fit_weight(&cum)?;
                slopes.push(SlopeRow {
                    series: name,
                    h_z_mt: h_z,
                    j_ga_m2: j,
                    t_ns: t,
                    weight: w,
                    repeat: r,
                    slope: fit.slope,
                    r_squared: fit.r_squared,
                });
                fitted.push(fit.slope);
            }
            let (mean, std) = mean_std(&fitted);
            if *name == "field" {
                field_means.push((h_z, mean));
            }
            points.push(json!({
                "series": name, "h_z_mT": h_z, "j_GA_m2": j, "t_ns": t,
                "weight": w, "slope_mean": mean, "slope_std": std,
            }));
        }
    }
    out.csv(NUCLEATION_TRACES, &traces)?;
    out.csv(NUCLEATION_SLOPES, &slopes)?;
    let law = linear_fit(&field_means)?;
    Ok(json!({
        "field_law": {
            "slope_sk_per_pulse_per_mT": law.slope,
            "intercept": law.intercept,
            "r_squared": law.r_squared,
            "field_max_mT": -law.intercept / law.slope,
        },
        "points": points,
    }))
}

#[derive(Serialize)]
struct SampleRow {
    index: u32,
    phase: &'static str,
    #[serde(rename = "delta_v_nV")]
    delta_v_nv: f64,
    #[serde(rename = "delta_v_corrected_nV")]
    delta_v_corrected_nv: Option<f64>,
    n_detec: u32,
}

fn trace_rows(trace: &MeasurementTrace) -> Vec<SampleRow> {
    let corrected = drift_correct(trace).ok();
    trace
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| SampleRow {
            index: s.index,
            phase: s.phase.as_str(),
            delta_v_nv: s.delta_v,
            delta_v_corrected_nv: corrected.as_ref().map(|c| c.samples[k].delta_v),
            n_detec: s.n_detec,
        })
        .collect()
}

fn phase_mean(trace: &MeasurementTrace, phase: Phase) -> Option<f64> {
    let v: Vec<f64> = trace
        .samples
        .iter()
        .filter(|s| s.phase == phase)
        .map(|s| s.delta_v)
        .collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn detection_run(cal: &DeviceCalibration, p: &DetectionRun, streams: Streams, out: &mut Artifacts) -> Result<Value> {
    let pulse = PulseTrain::forward(1, p.current_density, p.duration)?;
    let weight = match p.weight {
        Some(w) => w,
        None => synaptic_weight(cal, FieldSetting::new(p.field), &pulse)?,
    };
    let notch = Notch::for_calibration(cal);
    let mut zone = DetectionZone::starting_at(notch.x, cal);
    if let Some(c) = p.capacity {
        zone.capacity = c;
    }
    let device = SynapseTrack {
        cal: cal.clone(),
        weight,
        model: StochasticModel::new(p.p_bar)?,
        notch,
        zone,
        pulse,
        noise: p.noise.to_noise(),
        read_current: p.read_current,
    };
    let step = |phase, count| ProtocolStep { phase, count };
    let mut steps = vec![step(Phase::Baseline, p.baseline), step(Phase::Pulsing, p.pulses)];
    if p.stability > 0 {
        steps.push(step(Phase::Stability, p.stability));
    }
    steps.push(step(Phase::Reset, 1));
    steps.push(step(Phase::Post, p.post));
    let protocol = ProtocolSpec {
        steps,
        drift_per_index: p.drift_per_index,
        offset: p.offset,
    };
    let trace = measure_protocol(&device, &protocol, streams)?;
    out.csv(DETECTION_TRACE, &trace_rows(&trace))?;

    let last_pulse = trace.samples.iter().rfind(|s| s.phase == Phase::Pulsing);
    Ok(json!({
        "weight": weight,
        "expected_plateau_nV": weight * f64::from(p.pulses) * cal.per_skyrmion_voltage_mean * p.read_current / 100.0,
        "last_pulse": last_pulse.map(|s| json!({ "delta_v_nV": s.delta_v, "n_detec": s.n_detec })),
        "stability_mean_nV": phase_mean(&trace, Phase::Stability),
        "post_mean_nV": phase_mean(&trace, Phase::Post),
        "final_nV": trace.last().map(|s| s.delta_v),
    }))
}

fn fig4_twotrack(cal: &DeviceCalibration, p: &Fig4TwoTrack, streams: Streams, out: &mut Artifacts) -> Result<Value> {
    let config = CrossbarConfig::new(
        cal.clone(),
        vec![vec![p.weights[0]], vec![p.weights[1]]],
        ReadoutMode::LinearAhe,
    )?;
    let input = InputVector {
        pulses: vec![
            PulseTrain::forward(p.pulses[0], p.current_density, p.durations[0])?,
            PulseTrain::forward(p.pulses[1], p.current_density, p.durations[1])?,
        ],
    };
    let schedule = Fig4Schedule {
        baseline: p.baseline,
        stability: p.stability,
        post: p.post,
    };
    let model = StochasticModel::new(p.p_bar)?;
    let noise = p.noise.to_noise();
    let trace = run_fig4_protocol(&config, &input, &model, noise.as_ref(), schedule, streams)?;
    out.csv(TWOTRACK_TRACE, &trace_rows(&trace))?;

    let plateaus = trace.segment_means(Phase::Stability);
    let effective: Vec<f64> = (0..2)
        .map(|i| config.effective_weight(i, 0, &input.pulses[i]))
        .collect::<skyrmion_core::Result<_>>()?;
    Ok(json!({
        "effective_weights": effective,
        "plateaus_nV": plateaus,
        "plateau_ratio": (plateaus.len() == 2 && plateaus[0] != 0.0).then(|| plateaus[1] / plateaus[0]),
        "post_mean_nV": phase_mean(&trace, Phase::Post),
    }))
}

#[derive(Serialize)]
struct SigmaRow {
    p_one: f64,
    n_pulse: u32,
    sigma_mc: f64,
    sigma_analytic: f64,
}

fn montecarlo_sigma(p: &MontecarloSigma, streams: Streams, out: &mut Artifacts) -> Result<Value> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, &p_one) in p.p_one.iter().enumerate() {
        let model = StochasticModel::new(1.0 - p_one)?;
        for (j, &n) in p.n_pulses.iter().enumerate() {
            let s = streams.child(i as u64).child(j as u64);
            let sigma_mc = monte_carlo_sigma(&model, n, p.trials, s)?;
            let sigma_analytic = analytic_sigma(&model, n)?;
            if sigma_analytic > 0.0 {
                worst = worst.max((sigma_mc / sigma_analytic - 1.0).abs());
            }
            rows.push(SigmaRow {
                p_one,
                n_pulse: n,
                sigma_mc,
                sigma_analytic,
            });
        }
    }
    out.csv(SIGMA_TABLE, &rows)?;
    Ok(json!({ "trials": p.trials, "max_relative_deviation": worst }))
}

#[derive(Serialize)]
struct ParetoRow {
    preset: &'static str,
    n_pulse: u32,
    precision: f64,
    #[serde(rename = "energy_J")]
    energy_j: f64,
}

fn pareto(p: &Pareto, out: &mut Artifacts) -> Result<Value> {
    let mut rows = Vec::new();
    let mut presets = serde_json::Map::new();
    for &preset in &p.presets {
        let model = EnergyModel::from(preset);
        let curve = pareto_curve(p.m, p.p_bar, &model, 1..=p.n_pulse_max)?;
        rows.extend(curve.iter().map(|c| ParetoRow {
            preset: preset.name(),
            n_pulse: c.n_pulse,
            precision: c.precision,
            energy_j: c.energy,
        }));
        let last = curve[curve.len() - 1];
        presets.insert(
            preset.name().to_string(),
            json!({
                "e_per_skyrmion_J": preset.joules(),
                "synaptic_op_J": [sum_energy(1, 1, &model)?, sum_energy(1, p.n_pulse_max, &model)?],
                "max_precision": last.precision,
                "max_energy_J": last.energy,
            }),
        );
    }
    out.csv(PARETO_TABLE, &rows)?;
    Ok(json!({ "m": p.m, "p_bar": p.p_bar, "presets": presets }))
}

#[derive(Serialize)]
struct NetRow {
    sample: usize,
    column: usize,
    expected: f64,
    output_mean: f64,
    output_std: f64,
}

#[derive(Serialize)]
struct SiteRow {
    row: usize,
    col: usize,
    polarity: &'static str,
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    weight_sk_per_pulse: f64,
}

fn netsim(cal: &DeviceCalibration, p: &Netsim, streams: Streams, out: &mut Artifacts) -> Result<Value> {
    let rows = load_source(&p.weights, "protocol.weights")?;
    let inputs = load_source(&p.inputs, "protocol.inputs")?;
    let matrix = Matrix::from_rows(&rows).map_err(|e| LabError::validation("protocol.weights", e))?;
    let mut layer = quantize(&matrix, p.states)?;
    layer.program(cal, p.device_max)?;
    let activation = match p.activation {
        NetActivation::Identity => Activation::Identity,
        NetActivation::Hall => Activation::Hall,
        NetActivation::Mtj => Activation::Mtj(p.mtj),
    };
    let model = StochasticModel::new(p.p_bar)?;

    let mut table = Vec::new();
    for (s, x) in inputs.iter().enumerate() {
        if x.len() != layer.rows() {
            return Err(LabError::validation(
                format!("protocol.inputs[{s}]"),
                format!("expected {} values, got {}", layer.rows(), x.len()),
            ));
        }
        let expected = infer(&layer, x, InferMode::Expected, &activation, cal)?;
        let runs: Vec<Vec<f64>> = match p.mode {
            NetMode::Expected => vec![expected.clone()],
            NetMode::Stochastic => (0..p.trials)
                .map(|k| {
                    let mode = InferMode::Stochastic {
                        model,
                        streams: streams.child(s as u64).child(u64::from(k)),
                    };
                    infer(&layer, x, mode, &activation, cal)
                })
                .collect::<skyrmion_core::Result<_>>()?,
        };
        for (j, &e) in expected.iter().enumerate() {
            let ys: Vec<f64> = runs.iter().map(|r| r[j]).collect();
            let (mean, std) = mean_std(&ys);
            table.push(NetRow {
                sample: s,
                column: j,
                expected: e,
                output_mean: mean,
                output_std: std,
            });
        }
    }
    out.csv(NETSIM_OUTPUTS, &table)?;

    let schedule: Vec<SiteRow> = layer
        .schedule()
        .into_iter()
        .map(|site| SiteRow {
            row: site.row,
            col: site.col,
            polarity: match site.polarity {
                Polarity::Positive => "positive",
                Polarity::Negative => "negative",
            },
            h_z_mt: site.field.h_z,
            weight_sk_per_pulse: site.weight,
        })
        .collect();
    out.json(NETSIM_SCHEDULE, &serde_json::to_value(&schedule)?)?;

    let max_q_error = (0..layer.rows())
        .flat_map(|i| (0..layer.cols()).map(move |j| (i, j)))
        .map(|(i, j)| (layer.quantized(i, j) - matrix.get(i, j)).abs())
        .fold(0.0f64, f64::max);
    Ok(json!({
        "rows": layer.rows(),
        "cols": layer.cols(),
        "states": layer.states,
        "scale": layer.scale,
        "level_step": layer.step(),
        "max_quantization_error": max_q_error,
        "samples": inputs.len(),
    }))
}
