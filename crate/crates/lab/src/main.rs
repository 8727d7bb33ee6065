// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use skyrmion_core::device::DeviceCalibration;
use skyrmion_lab::calibrate::calibrate_from_traces;
use skyrmion_lab::run::default_output_dir;
use skyrmion_lab::spec::{
    set_dotted, CalibrationSpec, MatrixSource, MontecarloSigma, NetActivation, NetMode, Netsim, Pareto, Protocol,
};
use skyrmion_lab::sweep::{run_sweep, SweepAxis};
use skyrmion_lab::{emit_figure_data, run_experiment, ExperimentSpec, LabError, Result, RunOutput};

/// Skyrmion synapse experiments: runs specs, sweeps, Monte Carlo studies and
/// figure tables.
#[derive(Parser)]
#[command(name = "skyrmion-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; overrides the spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Calibration preset (paper2024, paper2024_twotrack).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory (a file for `calibrate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the field law to cumulative nucleation traces and print the
    /// resulting calibration as TOML.
    Calibrate {
        /// CSV with h_z_mT, n_pulses and n_sk columns.
        traces: PathBuf,
    },
    /// Run one experiment spec.
    Run { spec: PathBuf },
    /// Run a spec over a grid of values.
    Sweep {
        spec: PathBuf,
        /// `key=v1,v2,...` with a dotted key such as `protocol.p_bar`.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
    },
    /// Spread of the skyrmion count against sqrt(p_bar / N).
    Montecarlo {
        #[arg(long, value_delimiter = ',')]
        p_one: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        n_pulses: Option<Vec<u32>>,
    },
    /// Precision against energy for every energy preset.
    Pareto {
        #[arg(long, default_value_t = 10)]
        m: u32,
        #[arg(long, default_value_t = 0.4)]
        p_bar: f64,
        #[arg(long, default_value_t = 100)]
        n_pulse_max: u32,
    },
    /// Inference of a weight matrix through differential crossbar columns.
    Netsim {
        /// Headerless CSV, inputs by outputs.
        #[arg(long)]
        weights: PathBuf,
        /// Headerless CSV of pulse counts, one sample per row.
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long, default_value_t = 15)]
        states: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Expected)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = ActivationArg::Identity)]
        activation: ActivationArg,
        #[arg(long, default_value_t = 0.4)]
        p_bar: f64,
    },
    /// Write plot-ready tables for figures of a run directory.
    Emit {
        run_dir: PathBuf,
        /// 2e, 2g, 2h, 3, 4e, 5b or 5c.
        #[arg(required = true)]
        figures: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Expected,
    Stochastic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActivationArg {
    Identity,
    Hall,
    Mtj,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate { ref traces } => {
            let preset = cli.preset.as_deref().unwrap_or(DeviceCalibration::PAPER2024);
            let base = DeviceCalibration::preset(preset)
                .ok_or_else(|| LabError::validation("--preset", format!("unknown preset `{preset}`")))?;
            let fit = calibrate_from_traces(traces, &base)?;
            eprintln!(
                "slope {:.4} sk/pulse/mT, cutoff {:.3} mT, r^2 {:.5} over {} fields",
                fit.law.slope,
                fit.calibration.field_max,
                fit.law.r_squared,
                fit.points.len()
            );
            let text = toml::to_string(&fit.calibration).map_err(|e| LabError::Parse(e.to_string()))?;
            match &cli.out {
                Some(path) => std::fs::write(path, text).map_err(|source| LabError::Io {
                    path: path.clone(),
                    source,
                })?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Run { ref spec } => {
            let mut spec = ExperimentSpec::load(spec)?;
            apply_common(&cli, &mut spec);
            report(&run_experiment(&spec)?)
        }
        Command::Sweep { ref spec, ref sets } => {
            let text = std::fs::read_to_string(spec).map_err(|source| LabError::Io {
                path: spec.clone(),
                source,
            })?;
            let mut table: toml::Table = text
                .parse()
                .map_err(|e: toml::de::Error| LabError::Parse(e.to_string()))?;
            if let Some(seed) = cli.seed {
                set_dotted(&mut table, "seed", toml::Value::Integer(seed as i64))?;
            }
            if let Some(p) = &cli.preset {
                set_dotted(&mut table, "calibration.preset", toml::Value::String(p.clone()))?;
            }
            let axes = sets.iter().map(|s| SweepAxis::parse(s)).collect::<Result<Vec<_>>>()?;
            let name = table
                .get("name")
                .and_then(|v| v.as_str())
                .unwrap_or("sweep")
                .to_string();
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| Path::new("runs").join(format!("{name}-sweep")));
            let base_dir = spec.parent().map(Path::to_path_buf).unwrap_or_default();
            resolve_table_paths(&mut table, &base_dir);
            for run in run_sweep(&table, &axes, &out)? {
                println!("{}", run.dir.display());
            }
            Ok(())
        }
        Command::Montecarlo {
            ref p_one,
            ref n_pulses,
        } => {
            let mut p = MontecarloSigma::default();
            if let Some(v) = p_one {
                p.p_one = v.clone();
            }
            if let Some(v) = n_pulses {
                p.n_pulses = v.clone();
            }
            run_builtin(&cli, "montecarlo", Protocol::MontecarloSigma(p))
        }
        Command::Pareto { m, p_bar, n_pulse_max } => {
            let p = Pareto {
                m,
                p_bar,
                n_pulse_max,
                ..Pareto::default()
            };
            run_builtin(&cli, "pareto", Protocol::Pareto(p))
        }
        Command::Netsim {
            ref weights,
            ref inputs,
            states,
            mode,
            activation,
            p_bar,
        } => {
            let p = Netsim {
                weights: MatrixSource::File(weights.clone()),
                inputs: MatrixSource::File(inputs.clone()),
                states,
                mode: match mode {
                    ModeArg::Expected => NetMode::Expected,
                    ModeArg::Stochastic => NetMode::Stochastic,
                },
                activation: match activation {
                    ActivationArg::Identity => NetActivation::Identity,
                    ActivationArg::Hall => NetActivation::Hall,
                    ActivationArg::Mtj => NetActivation::Mtj,
                },
                p_bar,
                ..Netsim::default()
            };
            run_builtin(&cli, "netsim", Protocol::Netsim(p))
        }
        Command::Emit {
            ref run_dir,
            ref figures,
        } => {
            for figure in figures {
                println!("{}", emit_figure_data(run_dir, figure)?.display());
            }
            Ok(())
        }
    }
}

fn apply_common(cli: &Cli, spec: &mut ExperimentSpec) {
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(p) = &cli.preset {
        spec.calibration.preset = Some(p.clone());
    }
    if let Some(out) = &cli.out {
        spec.output_dir = Some(out.clone());
    }
    if let Some(trials) = cli.trials {
        match &mut spec.protocol {
            Protocol::MontecarloSigma(p) => p.trials = trials,
            Protocol::Netsim(p) => p.trials = trials,
            _ => {}
        }
    }
}

fn run_builtin(cli: &Cli, name: &str, protocol: Protocol) -> Result<()> {
    let mut spec = ExperimentSpec {
        name: name.to_string(),
        seed: 0,
        output_dir: None,
        calibration: CalibrationSpec::default(),
        protocol,
    };
    apply_common(cli, &mut spec);
    spec.output_dir = Some(default_output_dir(&spec));
    report(&run_experiment(&spec)?)
}

fn report(run: &RunOutput) -> Result<()> {
    println!("{}", run.dir.display());
    println!("{}", serde_json::to_string_pretty(&run.summary["results"])?);
    Ok(())
}

fn resolve_table_paths(table: &mut toml::Table, base: &Path) {
    let Some(protocol) = table.get_mut("protocol").and_then(|p| p.as_table_mut()) else {
        return;
    };
    for key in ["weights", "inputs"] {
        if let Some(toml::Value::String(s)) = protocol.get_mut(key) {
            *s = base.join(&*s).to_string_lossy().into_owned();
        }
    }
}
