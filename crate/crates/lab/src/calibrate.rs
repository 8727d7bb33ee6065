// SPDX-License-Identifier: Apache-2.0

//! Field-law calibration from cumulative nucleation traces.
//!
//! The input CSV needs `h_z_mT`, `n_pulses` and `n_sk` columns; an optional
//! `repeat` column separates traces at the same field and an optional
//! `series` column restricts the fit to rows labelled `field`. A
//! `nucleation_traces.csv` from a sweep qualifies as is.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use skyrmion_core::device::DeviceCalibration;
use skyrmion_core::nucleation::fit_weight;
use skyrmion_core::{linear_fit, LinearFit};

use crate::error::{LabError, Result};

#[derive(Deserialize)]
struct Row {
    #[serde(default)]
    series: Option<String>,
    #[serde(rename = "h_z_mT")]
    h_z_mt: f64,
    #[serde(default)]
    repeat: Option<u32>,
    n_pulses: f64,
    n_sk: f64,
}

#[derive(Debug, Clone)]
pub struct CalibrationFit {
    /// The base calibration with the fitted slope and cutoff field.
    pub calibration: DeviceCalibration,
    pub law: LinearFit,
    /// `(h_z, mean fitted slope)` per field.
    pub points: Vec<(f64, f64)>,
}

pub fn calibrate_from_traces(path: &Path, base: &DeviceCalibration) -> Result<CalibrationFit> {
    let mut reader = csv::Reader::from_path(path).map_err(LabError::csv(path))?;
    let rows: Vec<Row> = reader
        .deserialize()
        .collect::<csv::Result<_>>()
        .map_err(LabError::csv(path))?;
    calibrate_rows(&rows, base)
}

fn calibrate_rows(rows: &[Row], base: &DeviceCalibration) -> Result<CalibrationFit> {
    let mut traces: BTreeMap<(i64, u32), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.series.as_deref().is_none_or(|s| s == "field")) {
        // Fields are keyed in nT so equal values group together.
        let key = ((r.h_z_mt * 1e6).round() as i64, r.repeat.unwrap_or(0));
        traces.entry(key).or_default().push((r.n_pulses, r.n_sk));
    }
    let mut per_field: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for ((field, _), mut points) in traces {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        per_field.entry(field).or_default().push(fit_weight(&points)?.slope);
    }
    if per_field.len() < 2 {
        return Err(LabError::validation("h_z_mT", "need traces at 2 or more fields"));
    }
    let points: Vec<(f64, f64)> = per_field
        .into_iter()
        .map(|(f, s)| (f as f64 * 1e-6, s.iter().sum::<f64>() / s.len() as f64))
        .collect();
    let law = linear_fit(&points)?;
    let mut calibration = base.clone();
    calibration.weight_field_slope = law.slope;
    calibration.field_max = -law.intercept / law.slope;
    calibration
        .validate()
        .map_err(|e| LabError::validation("calibration", e))?;
    Ok(CalibrationFit {
        calibration,
        law,
        points,
    })
}
