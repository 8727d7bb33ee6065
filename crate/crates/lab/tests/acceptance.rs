// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use skyrmion_core::analysis::{sum_energy, sum_precision, synaptic_op_energy, EnergyModel, EnergyPreset};
use skyrmion_core::crossbar::{
    check_current_uniformity, monte_carlo_counts, run_fig4_protocol, CrossbarConfig, Fig4Schedule, InputVector,
    ReadCircuit, ReadoutMode,
};
use skyrmion_core::device::{synaptic_weight, DeviceCalibration, FieldSetting, Polarity, PulseTrain};
use skyrmion_core::nucleation::{
    analytic_sigma, cumulative, fit_weight, monte_carlo_sigma, nucleation_trace, StochasticModel,
};
use skyrmion_core::readout::{
    diameter_interval, estimate_diameter, full_reversal_voltage, measure_protocol, mtj_output, MtjConfig, Phase,
    ProtocolSpec, ReadoutNoise, SynapseTrack,
};
use skyrmion_core::rng::Streams;
use skyrmion_core::transport::{DetectionZone, Notch, SkyrmionPopulation};
use skyrmion_lab::run::{CONFIG_FILE, MANIFEST_FILE, SUMMARY_FILE};
use skyrmion_lab::{run_experiment, ExperimentSpec};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("weight-law recovery", weight_law),
        ("linearity", linearity),
        ("sigma oracle", sigma_oracle),
        ("sqrt(M) law", sqrt_m_law),
        ("detection chain", detection_chain),
        ("two-track additivity", two_track_additivity),
        ("diameter round trip", diameter_round_trip),
        ("precision/energy tables", precision_energy),
        ("MTJ activation", mtj_activation),
        ("circuit uniformity", circuit_uniformity),
        ("transport geometry", transport_geometry),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {:>2} {name}: {detail} [{:.2} s]",
            k + 1,
            t0.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn spec(text: &str, out: &Path) -> Result<ExperimentSpec, String> {
    let mut spec = ExperimentSpec::from_toml(text).map_err(err)?;
    spec.output_dir = Some(out.to_path_buf());
    Ok(spec)
}

fn weight_law() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let s = spec(
        r#"
name = "weight-law"
seed = 2024

[protocol]
kind = "nucleation_sweep"
fields = [20.0, 20.5, 21.0, 21.5, 22.0, 22.5, 23.0, 23.5, 24.0, 24.5, 25.0, 25.5, 26.0]
currents = []
durations = []
pulses = 20
repeats = 100
p_bar = 0.4
"#,
        dir.path(),
    )?;
    let t0 = Instant::now();
    let run = run_experiment(&s).map_err(err)?;
    let secs = t0.elapsed().as_secs_f64();
    let slope = run.summary["results"]["field_law"]["slope_sk_per_pulse_per_mT"]
        .as_f64()
        .ok_or("summary lacks the field-law slope")?;
    let pass = (slope + 0.57).abs() <= 0.05 && secs < 10.0;
    Ok((
        pass,
        format!("slope {slope:.4} sk/pulse/mT (target -0.57 +/- 0.05), {secs:.2} s"),
    ))
}

fn linearity() -> Outcome {
    let cal = DeviceCalibration::paper2024();
    let field = FieldSetting::new(24.0);
    let presets = [
        (160.0, 50.0),
        (171.0, 50.0),
        (180.0, 50.0),
        (171.0, 40.0),
        (171.0, 60.0),
    ];
    let mut worst_slope = 0.0f64;
    let mut worst_r2 = 0.0f64;
    for (j, t) in presets {
        let pulse = PulseTrain::forward(1, j, t).map_err(err)?;
        let w = synaptic_weight(&cal, field, &pulse).map_err(err)?;
        let points: Vec<(f64, f64)> = (0..=20).map(|k| (f64::from(k), w * f64::from(k))).collect();
        let fit = fit_weight(&points).map_err(err)?;
        worst_slope = worst_slope.max((fit.slope - w).abs());
        worst_r2 = worst_r2.max((fit.r_squared - 1.0).abs());
    }
    let mut rng = Streams::new(1).stream(0);
    let exact = nucleation_trace(1.0, &StochasticModel::deterministic(), 20, &mut rng).map_err(err)?;
    let unit = fit_weight(&cumulative(&exact)).map_err(err)?;
    worst_slope = worst_slope.max((unit.slope - 1.0).abs());
    worst_r2 = worst_r2.max((unit.r_squared - 1.0).abs());

    let model = StochasticModel::new(0.4).map_err(err)?;
    let n = 20;
    let bound = analytic_sigma(&model, n).map_err(err)?;
    let streams = Streams::new(2);
    let trials = 10_000u64;
    let mut sq = 0.0;
    let mut ols = Vec::with_capacity(trials as usize);
    for k in 0..trials {
        let mut rng = streams.stream(k);
        let events = nucleation_trace(1.0, &model, n, &mut rng).map_err(err)?;
        let total: u32 = events.iter().map(|e| e.count).sum();
        sq += (f64::from(total) / f64::from(n) - 1.0).powi(2);
        ols.push(fit_weight(&cumulative(&events)).map_err(err)?.slope);
    }
    let rms = (sq / trials as f64).sqrt();
    let (_, ols_std) = mean_std(&ols);
    let pass = worst_slope <= 1e-9 && worst_r2 <= 1e-12 && rms <= 1.05 * bound;
    Ok((
        pass,
        format!(
            "noise-free |slope-w| {worst_slope:.1e}, |R2-1| {worst_r2:.1e}; stochastic slope error {rms:.4} vs bound {bound:.4} (OLS slope std {ols_std:.4})"
        ),
    ))
}

fn sigma_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for p in 1..=9u32 {
        let model = StochasticModel::new(f64::from(p) / 10.0).map_err(err)?;
        for n in [10, 100, 1000] {
            let mc = monte_carlo_sigma(&model, n, 100_000, Streams::new(3).child(u64::from(p))).map_err(err)?;
            let want = analytic_sigma(&model, n).map_err(err)?;
            worst = worst.max((mc / want - 1.0).abs());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok((
        worst <= 0.05 && secs < 30.0,
        format!(
            "max relative deviation {:.2}% over 27 points, {secs:.2} s",
            100.0 * worst
        ),
    ))
}

fn sqrt_m_law() -> Outcome {
    let cal = DeviceCalibration::paper2024();
    let m = 10;
    let n = 20;
    let config = CrossbarConfig::new(cal, vec![vec![1.0]; m], ReadoutMode::LinearAhe)
        .map_err(err)?
        .without_capacity();
    let pulse = PulseTrain::forward(1, 150.0, 50.0).map_err(err)?;
    let input = InputVector::from_counts(&vec![n; m], pulse);
    let model = StochasticModel::new(0.4).map_err(err)?;
    let runs = monte_carlo_counts(&config, &input, &model, 100_000, Streams::new(4)).map_err(err)?;
    let sums: Vec<f64> = runs.iter().map(|r| f64::from(r[0])).collect();
    let (mean, std) = mean_std(&sums);
    let rel = std / mean;
    let want = analytic_sigma(&model, n).map_err(err)? / (m as f64).sqrt();
    let dev = (rel / want - 1.0).abs();
    Ok((
        dev <= 0.05,
        format!(
            "relative std {rel:.5} vs sigma/sqrt(10) {want:.5} ({:.2}%)",
            100.0 * dev
        ),
    ))
}

fn detection_chain() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let s = spec(
        r#"
name = "detection"
seed = 5

[protocol]
kind = "detection_run"
weight = 1.0
pulses = 20
p_bar = 0.0
noise = { sigma_meas = 0.0, per_skyrmion = false }
"#,
        dir.path(),
    )?;
    let run = run_experiment(&s).map_err(err)?;
    let last = &run.summary["results"]["last_pulse"];
    let v = last["delta_v_nV"].as_f64().ok_or("summary lacks the last pulse")?;
    let n_detec = last["n_detec"].as_u64().ok_or("summary lacks n_detec")?;

    let cal = DeviceCalibration::paper2024();
    let notch = Notch::for_calibration(&cal);
    let device = SynapseTrack {
        weight: 1.0,
        model: StochasticModel::new(0.4).map_err(err)?,
        notch,
        zone: DetectionZone::starting_at(notch.x, &cal),
        pulse: PulseTrain::forward(1, 150.0, 50.0).map_err(err)?,
        noise: Some(ReadoutNoise::default()),
        read_current: 100.0,
        cal,
    };
    let protocol = ProtocolSpec::standard(10, 20, 10);
    let (mut within, mut total) = (0usize, 0usize);
    for seed in 0..1000 {
        let trace = measure_protocol(&device, &protocol, Streams::new(seed)).map_err(err)?;
        for s in trace.samples.iter().filter(|s| s.phase == Phase::Post) {
            total += 1;
            within += usize::from(s.delta_v.abs() <= 75.0);
        }
    }
    let frac = within as f64 / total as f64;
    Ok((
        v == 440.0 && n_detec == 20 && frac >= 0.99,
        format!(
            "noise-free dV {v} nV with {n_detec} skyrmions; {:.2}% of post-reset samples within 75 nV",
            100.0 * frac
        ),
    ))
}

fn plateaus(
    config: &CrossbarConfig,
    input: &InputVector,
    model: &StochasticModel,
    noise: Option<&ReadoutNoise>,
    seed: u64,
) -> Result<(f64, f64), String> {
    let trace =
        run_fig4_protocol(config, input, model, noise, Fig4Schedule::default(), Streams::new(seed)).map_err(err)?;
    match trace.segment_means(Phase::Stability)[..] {
        [a, b] => Ok((a, b)),
        _ => Err("expected two stability plateaus".into()),
    }
}

fn two_track_additivity() -> Outcome {
    let cal = DeviceCalibration::paper2024_twotrack();
    let model = StochasticModel::new(0.4).map_err(err)?;
    let pulse = PulseTrain::forward(30, 116.0, 50.0).map_err(err)?;
    let input = InputVector {
        pulses: vec![pulse, pulse],
    };
    let equal = CrossbarConfig::new(cal.clone(), vec![vec![0.16], vec![0.16]], ReadoutMode::LinearAhe).map_err(err)?;
    let zero = CrossbarConfig::new(cal, vec![vec![0.16], vec![0.0]], ReadoutMode::LinearAhe).map_err(err)?;
    let noise = ReadoutNoise::default();
    let runs = 4000;
    let (mut first, mut second) = (0.0, 0.0);
    for seed in 0..runs {
        let (a, b) = plateaus(&equal, &input, &model, Some(&noise), seed)?;
        first += a;
        second += b;
    }
    let ratio = second / first;

    let meas = ReadoutNoise::measurement_only(noise.sigma_meas);
    let mut exact = true;
    let mut change = 0.0;
    let zero_runs = 1000;
    for seed in 0..zero_runs {
        let (a, b) = plateaus(&zero, &input, &model, None, seed)?;
        exact &= a == b;
        let (a, b) = plateaus(&zero, &input, &model, Some(&meas), seed)?;
        change += b - a;
    }
    let change = change / zero_runs as f64;
    Ok((
        (ratio / 2.0 - 1.0).abs() <= 0.03 && exact && change.abs() < noise.sigma_meas,
        format!(
            "plateaus {:.1} / {:.1} nV, ratio {ratio:.4}; zero-weight track 2 changes the total by {change:.2} nV (noise std {} nV), noise-free unchanged: {exact}",
            first / runs as f64,
            second / runs as f64,
            noise.sigma_meas
        ),
    ))
}

fn diameter_round_trip() -> Outcome {
    let cal = DeviceCalibration::paper2024();
    let zone = DetectionZone::starting_at(Notch::DEFAULT_X, &cal);
    let dv = cal.per_skyrmion_voltage_mean;
    let full = full_reversal_voltage(dv, 222.0, &zone);
    let d = estimate_diameter(dv, full, &zone).map_err(err)?;
    let rel = (d / 222.0 - 1.0).abs();
    let (lo, hi) = diameter_interval(dv, 7.0, full, &zone).map_err(err)?;
    let half = 0.5 * (hi - lo);
    Ok((
        rel <= 1e-6 && (33.0..=36.0).contains(&half),
        format!("d {d:.6} nm (rel {rel:.1e}); +/-7 nV -> [{lo:.1}, {hi:.1}] nm, half-width {half:.1} nm"),
    ))
}

fn precision_energy() -> Outcome {
    let m = 10;
    let p_bar = 0.4;
    let mut worst_p = 0.0f64;
    let mut worst_e = 0.0f64;
    for n in 1..=100 {
        let p = sum_precision(m, n, p_bar).map_err(err)?;
        worst_p = worst_p.max((p.value - (1.0 - (p_bar / f64::from(m * n)).sqrt())).abs());
        for preset in EnergyPreset::ALL {
            let e = sum_energy(m, n, &preset.into()).map_err(err)?;
            worst_e = worst_e.max((e / (f64::from(m * n) * preset.joules()) - 1.0).abs());
        }
    }
    let barrier = EnergyModel::from(EnergyPreset::BarrierLimit);
    let kt_500 = 500.0 * 1.380_649e-23 * 300.0;
    let per_nucleation = synaptic_op_energy(1, &barrier).map_err(err)?;
    let ops: Vec<f64> = (1..=50)
        .map(|n| synaptic_op_energy(n, &barrier))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let (lo, hi) = ops.iter().fold((f64::MAX, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
    let in_band = lo >= 1e-18 * (1.0 - 1e-12) && hi <= 100e-18 * (1.0 + 1e-12);
    Ok((
        worst_p <= 1e-15
            && worst_e <= 1e-15
            && (per_nucleation - 2e-18).abs() <= 1e-30
            && (per_nucleation / kt_500 - 1.0).abs() < 0.05
            && in_band,
        format!(
            "precision err {worst_p:.1e}, energy err {worst_e:.1e}; barrier {:.2} aJ (500 kT = {:.2} aJ), per-op {:.0}..{:.0} aJ for N <= 50",
            per_nucleation * 1e18,
            kt_500 * 1e18,
            lo * 1e18,
            hi * 1e18
        ),
    ))
}

fn mtj_activation() -> Outcome {
    let mut rng = Streams::new(9).stream(0);
    let xs: Vec<f64> = (0..=100).map(|k| f64::from(k) / 100.0).collect();
    let mut ok = true;
    for _ in 0..1000 {
        let mtj = MtjConfig {
            r_parallel: rng.random_range(100.0..10_000.0),
            tmr: rng.random_range(0.0..3.0),
            junction_area: 36.0,
            read_current: rng.random_range(1.0..100.0),
        };
        let v: Vec<f64> = xs.iter().map(|&x| mtj_output(x, &mtj)).collect();
        let scale = v[100];
        ok &= v.windows(2).all(|w| w[1] >= w[0]);
        ok &= v.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-12 * scale);
        ok &= v[100] == mtj.read_current * mtj.r_parallel * (1.0 + mtj.tmr) * 1e-3;
        let flat = MtjConfig { tmr: 0.0, ..mtj };
        let f0 = mtj_output(0.0, &flat);
        ok &= xs.iter().all(|&x| mtj_output(x, &flat) == f0);
    }
    Ok((
        ok,
        "1000 random (tmr, R_P) draws: monotone, convex, exact endpoint, flat at tmr = 0".into(),
    ))
}

fn circuit_uniformity() -> Outcome {
    let u = check_current_uniformity(&ReadCircuit::two_track());
    Ok((
        u.max_imbalance < 1e-3,
        format!(
            "max imbalance {:.3e} for 130/120 Ohm tracks with 12 kOhm series",
            u.max_imbalance
        ),
    ))
}

fn transport_geometry() -> Outcome {
    let cal = DeviceCalibration::paper2024();
    let mut pop = SkyrmionPopulation::with_geometry(0, 40.0, 20.0);
    let origin = Notch { x: 0.0, y: 1.0 };
    let (x0, y0) = (1.0, 1.0);
    pop.place_with_origin(x0, y0, origin);
    // 30 m/s for 50 ns is 1.5 um per pulse.
    let forward = PulseTrain::forward(10, 200.0, 50.0).map_err(err)?;
    pop.advance(&forward, &cal).map_err(err)?;
    let s = pop.skyrmions()[0];
    let travel = s.x - x0;
    let deflection = s.y - y0;
    let want = 15.0 * 15f64.to_radians().tan();
    let reverse = PulseTrain::new(10, 200.0, 50.0, Polarity::Reverse).map_err(err)?;
    pop.reverse_erase(&reverse, &cal, 0.0, &mut Streams::new(0).stream(0))
        .map_err(err)?;
    let back = pop.skyrmions()[0];
    let round = (back.x - x0).abs().max((back.y - y0).abs());
    Ok((
        s.alive && back.alive && (travel - 15.0).abs() <= 1e-9 && (deflection - want).abs() <= 1e-6 && round <= 1e-9,
        format!("deflection {deflection:.6} um after {travel:.3} um (want {want:.6}); round trip error {round:.1e} um"),
    ))
}

fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).map_err(err)? {
            let path = entry.map_err(err)?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).map_err(err)?.to_string_lossy().into_owned();
                files.insert(rel, fs::read(&path).map_err(err)?);
            }
        }
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let protocols = [
        "kind = \"nucleation_sweep\"\nrepeats = 20",
        "kind = \"detection_run\"",
        "kind = \"fig4_twotrack\"",
        "kind = \"montecarlo_sigma\"\ntrials = 1000\nn_pulses = [1, 10, 100]",
        "kind = \"pareto\"",
        "kind = \"netsim\"\nweights = [[0.5, -1.0], [0.25, 0.75], [-0.5, 0.1]]\ninputs = [[3, 5, 2], [10, 0, 7]]\nmode = \"stochastic\"\ntrials = 50",
    ];
    let mut compared = 0;
    for body in protocols {
        let text = format!("name = \"det\"\nseed = 77\n\n[protocol]\n{body}\n");
        let (a, b) = (tempfile::tempdir().map_err(err)?, tempfile::tempdir().map_err(err)?);
        run_experiment(&spec(&text, a.path())?).map_err(err)?;
        run_experiment(&spec(&text, b.path())?).map_err(err)?;
        let (fa, fb) = (snapshot(a.path())?, snapshot(b.path())?);
        if fa != fb {
            let diff: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
            return Ok((false, format!("`{body}` differs in {diff:?}")));
        }
        for required in [CONFIG_FILE, SUMMARY_FILE, MANIFEST_FILE] {
            if !fa.contains_key(required) {
                return Ok((false, format!("`{body}` did not write {required}")));
            }
        }
        compared += fa.keys().filter(|k| k.ends_with(".csv")).count();
    }
    Ok((
        true,
        format!("6 protocols rerun with seed 77: {compared} CSV files byte-identical"),
    ))
}
