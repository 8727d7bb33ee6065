// SPDX-License-Identifier: Apache-2.0

//! Plot-ready CSV tables extracted from run directories.
//!
//! | figure | source | columns |
//! |---|---|---|
//! | `2e` | nucleation_sweep | `j_GA_m2, n_pulses, n_sk_mean` |
//! | `2g` | nucleation_sweep | `h_z_mT, n_pulses, n_sk_mean` |
//! | `2h` | nucleation_sweep | `h_z_mT, slope_sk_per_pulse` |
//! | `3` | detection_run | `index, phase, delta_v_nV, n_detec` |
//! | `4e` | fig4_twotrack | `index, phase, delta_v_nV, n_detec` |
//! | `5b` | montecarlo_sigma | `p_one, n_pulse, sigma, sigma_analytic` |
//! | `5c` | pareto | `precision, energy_J, preset` |

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::run::{
    write_csv, DETECTION_TRACE, NUCLEATION_SLOPES, NUCLEATION_TRACES, PARETO_TABLE, SIGMA_TABLE, TWOTRACK_TRACE,
};

pub const FIGURES: [&str; 7] = ["2e", "2g", "2h", "3", "4e", "5b", "5c"];

/// Subdirectory of a run directory that receives figure tables.
pub const FIGURE_DIR: &str = "figures";

/// Writes `figures/fig<id>.csv` in `run_dir` and returns its path.
pub fn emit_figure_data(run_dir: &Path, figure: &str) -> Result<PathBuf> {
    if !FIGURES.contains(&figure) {
        return Err(LabError::UnknownFigure(figure.to_string()));
    }
    let dir = run_dir.join(FIGURE_DIR);
    let out = dir.join(format!("fig{figure}.csv"));
    match figure {
        "2e" => {
            let rows = nucleation_means(run_dir, "current", |r| r.j_ga_m2)?;
            let rows: Vec<CurrentRow> = rows
                .into_iter()
                .map(|(j_ga_m2, n_pulses, n_sk_mean)| CurrentRow {
                    j_ga_m2,
                    n_pulses,
                    n_sk_mean,
                })
                .collect();
            write(&dir, &out, &rows)?;
        }
        "2g" => {
            let rows = nucleation_means(run_dir, "field", |r| r.h_z_mt)?;
            let rows: Vec<FieldRow> = rows
                .into_iter()
                .map(|(h_z_mt, n_pulses, n_sk_mean)| FieldRow {
                    h_z_mt,
                    n_pulses,
                    n_sk_mean,
                })
                .collect();
            write(&dir, &out, &rows)?;
        }
        "2h" => {
            let slopes: Vec<SlopeIn> = read(run_dir, NUCLEATION_SLOPES)?;
            let means = grouped_means(
                slopes
                    .iter()
                    .filter(|s| s.series == "field")
                    .map(|s| ((s.h_z_mt.to_bits(), 0), s.slope)),
            );
            let rows: Vec<SlopeOut> = means
                .into_iter()
                .map(|((h, _), slope)| SlopeOut {
                    h_z_mt: f64::from_bits(h),
                    slope_sk_per_pulse: slope,
                })
                .collect();
            write(&dir, &out, &rows)?;
        }
        "3" | "4e" => {
            let source = if figure == "3" { DETECTION_TRACE } else { TWOTRACK_TRACE };
            let rows: Vec<SampleRow> = read(run_dir, source)?;
            write(&dir, &out, &rows)?;
        }
        "5b" => {
            let rows: Vec<SigmaIn> = read(run_dir, SIGMA_TABLE)?;
            let rows: Vec<SigmaOut> = rows
                .into_iter()
                .map(|r| SigmaOut {
                    p_one: r.p_one,
                    n_pulse: r.n_pulse,
                    sigma: r.sigma_mc,
                    sigma_analytic: r.sigma_analytic,
                })
                .collect();
            write(&dir, &out, &rows)?;
        }
        "5c" => {
            let rows: Vec<ParetoIn> = read(run_dir, PARETO_TABLE)?;
            let rows: Vec<ParetoOut> = rows
                .into_iter()
                .map(|r| ParetoOut {
                    precision: r.precision,
                    energy_j: r.energy_j,
                    preset: r.preset,
                })
                .collect();
            write(&dir, &out, &rows)?;
        }
        _ => unreachable!(),
    }
    Ok(out)
}

fn read<T: DeserializeOwned>(run_dir: &Path, name: &str) -> Result<Vec<T>> {
    let path = run_dir.join(name);
    if !path.is_file() {
        return Err(LabError::MissingArtifact(path));
    }
    let mut reader = csv::Reader::from_path(&path).map_err(LabError::csv(&path))?;
    reader
        .deserialize()
        .collect::<csv::Result<_>>()
        .map_err(LabError::csv(&path))
}

fn write<T: Serialize>(dir: &Path, out: &Path, rows: &[T]) -> Result<()> {
    fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    write_csv(out, rows)
}

/// Means by key, in order of first appearance.
fn grouped_means(items: impl Iterator<Item = ((u64, u32), f64)>) -> Vec<((u64, u32), f64)> {
    let mut index: HashMap<(u64, u32), usize> = HashMap::new();
    let mut acc: Vec<((u64, u32), f64, u32)> = Vec::new();
    for (key, v) in items {
        let k = *index.entry(key).or_insert_with(|| {
            acc.push((key, 0.0, 0));
            acc.len() - 1
        });
        acc[k].1 += v;
        acc[k].2 += 1;
    }
    acc.into_iter().map(|(k, s, n)| (k, s / f64::from(n))).collect()
}

fn nucleation_means(run_dir: &Path, series: &str, key: fn(&TraceIn) -> f64) -> Result<Vec<(f64, u32, f64)>> {
    let traces: Vec<TraceIn> = read(run_dir, NUCLEATION_TRACES)?;
    Ok(grouped_means(
        traces
            .iter()
            .filter(|r| r.series == series)
            .map(|r| ((key(r).to_bits(), r.n_pulses), r.n_sk as f64)),
    )
    .into_iter()
    .map(|((k, n), mean)| (f64::from_bits(k), n, mean))
    .collect())
}

#[derive(Deserialize)]
struct TraceIn {
    series: String,
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    j_ga_m2: f64,
    n_pulses: u32,
    n_sk: u64,
}

#[derive(Serialize)]
struct CurrentRow {
    #[serde(rename = "j_GA_m2")]
    j_ga_m2: f64,
    n_pulses: u32,
    n_sk_mean: f64,
}

#[derive(Serialize)]
struct FieldRow {
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    n_pulses: u32,
    n_sk_mean: f64,
}

#[derive(Deserialize)]
struct SlopeIn {
    series: String,
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    slope: f64,
}

#[derive(Serialize)]
struct SlopeOut {
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    slope_sk_per_pulse: f64,
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    index: u32,
    phase: String,
    #[serde(rename = "delta_v_nV")]
    delta_v_nv: f64,
    n_detec: u32,
}

#[derive(Deserialize)]
struct SigmaIn {
    p_one: f64,
    n_pulse: u32,
    sigma_mc: f64,
    sigma_analytic: f64,
}

#[derive(Serialize)]
struct SigmaOut {
    p_one: f64,
    n_pulse: u32,
    sigma: f64,
    sigma_analytic: f64,
}

#[derive(Deserialize)]
struct ParetoIn {
    preset: String,
    precision: f64,
    #[serde(rename = "energy_J")]
    energy_j: f64,
}

#[derive(Serialize)]
struct ParetoOut {
    precision: f64,
    #[serde(rename = "energy_J")]
    energy_j: f64,
    preset: String,
}
