// SPDX-License-Identifier: Apache-2.0

//! Cartesian grids of specs, one run directory per grid point.

use std::fs;
use std::path::Path;

use crate::error::{LabError, Result};
use crate::run::{run_experiment, RunOutput};
use crate::spec::{set_dotted, ExperimentSpec};

/// One swept key with its values, e.g. `protocol.p_bar = [0.2, 0.4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

impl SweepAxis {
    /// Parses `key=v1,v2,...`; values are TOML literals or bare strings.
    pub fn parse(text: &str) -> Result<Self> {
        let (key, values) = text
            .split_once('=')
            .ok_or_else(|| LabError::validation(text, "expected key=v1,v2,..."))?;
        let key = key.trim().to_string();
        let values: Vec<toml::Value> = values.split(',').map(|v| crate::spec::parse_value(v.trim())).collect();
        if key.is_empty() || values.is_empty() {
            return Err(LabError::validation(text, "expected key=v1,v2,..."));
        }
        Ok(Self { key, values })
    }
}

/// Every combination of axis values applied to `base`, first axis slowest.
pub fn expand(base: &toml::Table, axes: &[SweepAxis]) -> Result<Vec<(Vec<toml::Value>, ExperimentSpec)>> {
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let mut out = Vec::with_capacity(total);
    for k in 0..total {
        let mut table = base.clone();
        let mut rest = k;
        let mut picked = vec![toml::Value::Boolean(false); axes.len()];
        for (a, axis) in axes.iter().enumerate().rev() {
            let v = axis.values[rest % axis.values.len()].clone();
            rest /= axis.values.len();
            set_dotted(&mut table, &axis.key, v.clone())?;
            picked[a] = v;
        }
        out.push((picked, ExperimentSpec::from_table(table)?));
    }
    Ok(out)
}

/// Runs every grid point into `out_dir/run_NNN` and writes `out_dir/sweep.csv`
/// mapping run directories to axis values.
pub fn run_sweep(base: &toml::Table, axes: &[SweepAxis], out_dir: &Path) -> Result<Vec<RunOutput>> {
    let grid = expand(base, axes)?;
    fs::create_dir_all(out_dir).map_err(LabError::io(out_dir))?;
    let index = out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&index).map_err(LabError::csv(&index))?;
    let mut header = vec!["run".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    w.write_record(&header).map_err(LabError::csv(&index))?;
    let mut outputs = Vec::with_capacity(grid.len());
    for (k, (values, mut spec)) in grid.into_iter().enumerate() {
        let run = format!("run_{k:03}");
        spec.output_dir = Some(out_dir.join(&run));
        outputs.push(run_experiment(&spec)?);
        let mut record = vec![run];
        record.extend(values.iter().map(|v| match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        }));
        w.write_record(&record).map_err(LabError::csv(&index))?;
    }
    w.flush().map_err(LabError::io(&index))?;
    Ok(outputs)
}
