// SPDX-License-Identifier: Apache-2.0

//! Mapping trained layer weights onto skyrmion crossbars.
//!
//! Weights are quantized to `states` magnitude levels; the sign selects one
//! column of a differential pair. Column `2j` carries the positive part of
//! output `j` and column `2j + 1` the negative part, and the output is
//! `f(positive) - f(negative)`. Inputs are pulse counts.

use alloc::vec;
use alloc::vec::Vec;

use crate::crossbar::{run_weighted_sum, CrossbarConfig, InputVector, ReadoutMode};
use crate::device::{DeviceCalibration, FieldSetting, PulseTrain};
use crate::nucleation::StochasticModel;
use crate::readout::{mtj_output, skyrmion_area, MtjConfig};
use crate::rng::Streams;
use crate::{Error, Result};

/// Dense row-major matrix, `rows` inputs by `cols` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::Precondition("matrix must be non-empty"));
        }
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    /// `y_j = sum_i x_i m_ij`
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.get(i, j)).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Programming of one crossing of the differential array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteProgram {
    pub row: usize,
    /// Logical output column.
    pub col: usize,
    pub polarity: Polarity,
    pub field: FieldSetting,
    /// Skyrmions per pulse.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedLayer {
    pub weights: Matrix,
    /// Signed level index per entry, in `-(states - 1)..=states - 1`.
    pub levels: Vec<i32>,
    pub states: u32,
    /// Largest weight magnitude, mapped to the top level.
    pub w_max: f64,
    /// Weight units per skyrmion per pulse.
    pub scale: f64,
    /// `(positive, negative)` column fields per entry; empty until
    /// [`QuantizedLayer::program`] is called.
    pub field_assignments: Vec<(FieldSetting, FieldSetting)>,
}

/// Uniform magnitude quantizer with `states` levels on `[0, w_max]`.
pub fn quantize(weights: &Matrix, states: u32) -> Result<QuantizedLayer> {
    if states < 2 {
        return Err(Error::Precondition("need at least 2 states"));
    }
    if weights.data.iter().any(|w| !w.is_finite()) {
        return Err(Error::Precondition("weights must be finite"));
    }
    let w_max = weights.data.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let top = f64::from(states - 1);
    let levels = weights
        .data
        .iter()
        .map(|&w| {
            if w_max == 0.0 {
                0
            } else {
                let level = libm::round(w.abs() / w_max * top) as i32;
                if w < 0.0 {
                    -level
                } else {
                    level
                }
            }
        })
        .collect();
    Ok(QuantizedLayer {
        weights: weights.clone(),
        levels,
        states,
        w_max,
        scale: if w_max > 0.0 { w_max } else { 1.0 },
        field_assignments: Vec::new(),
    })
}

impl QuantizedLayer {
    pub fn rows(&self) -> usize {
        self.weights.rows
    }

    pub fn cols(&self) -> usize {
        self.weights.cols
    }

    /// Weight-unit spacing between levels.
    pub fn step(&self) -> f64 {
        self.w_max / f64::from(self.states - 1)
    }

    pub fn quantized(&self, row: usize, col: usize) -> f64 {
        f64::from(self.levels[row * self.cols() + col]) * self.step()
    }

    pub fn quantized_matrix(&self) -> Matrix {
        Matrix {
            rows: self.rows(),
            cols: self.cols(),
            data: (0..self.rows())
                .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
                .map(|(i, j)| self.quantized(i, j))
                .collect(),
        }
    }

    /// Device weights (skyrmions per pulse) of the positive and negative
    /// columns for an entry.
    pub fn device_weights(&self, row: usize, col: usize) -> (f64, f64) {
        let q = self.quantized(row, col) / self.scale;
        (q.max(0.0), (-q).max(0.0))
    }

    /// Maps the top level to `device_max` skyrmions per pulse and assigns the
    /// field of every site.
    pub fn program(&mut self, cal: &DeviceCalibration, device_max: f64) -> Result<()> {
        if !(device_max > 0.0) || device_max > cal.max_weight() {
            return Err(Error::OutOfRange {
                value: device_max,
                min: 0.0,
                max: cal.max_weight(),
            });
        }
        if self.w_max > 0.0 {
            self.scale = self.w_max / device_max;
        }
        self.field_assignments = (0..self.rows())
            .flat_map(|i| (0..self.cols()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (pos, neg) = self.device_weights(i, j);
                Ok((field_for_weight(pos, cal)?, field_for_weight(neg, cal)?))
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Per-site programming, positive column first for each entry.
    pub fn schedule(&self) -> Vec<SiteProgram> {
        let mut out = Vec::with_capacity(2 * self.field_assignments.len());
        for (k, &(pos_field, neg_field)) in self.field_assignments.iter().enumerate() {
            let (row, col) = (k / self.cols(), k % self.cols());
            let (pos, neg) = self.device_weights(row, col);
            out.push(SiteProgram {
                row,
                col,
                polarity: Polarity::Positive,
                field: pos_field,
                weight: pos,
            });
            out.push(SiteProgram {
                row,
                col,
                polarity: Polarity::Negative,
                field: neg_field,
                weight: neg,
            });
        }
        out
    }
}

/// Field that programs a weight, the inverse of the field law.
pub fn field_for_weight(w_target: f64, cal: &DeviceCalibration) -> Result<FieldSetting> {
    let ceiling = cal.max_weight();
    if !(w_target >= 0.0) || w_target > ceiling * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            value: w_target,
            min: 0.0,
            max: ceiling,
        });
    }
    let h_z = (cal.field_max - w_target / cal.weight_field_slope.abs()).max(cal.field_min);
    Ok(FieldSetting::new(h_z))
}

/// Column readout applied to each side of a differential pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// Skyrmion count converted back to weight units.
    Identity,
    /// Hall voltage, nV.
    Hall,
    /// MTJ output, mV.
    Mtj(MtjConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InferMode {
    /// Mean skyrmion counts `sum_i w_ij x_i`.
    Expected,
    /// One stochastic crossbar run.
    Stochastic { model: StochasticModel, streams: Streams },
}

fn activate(count: f64, activation: &Activation, layer: &QuantizedLayer, cal: &DeviceCalibration) -> f64 {
    match activation {
        Activation::Identity => count * layer.scale,
        Activation::Hall => count * cal.per_skyrmion_voltage_mean,
        Activation::Mtj(mtj) => mtj_output(count * skyrmion_area(cal) / mtj.junction_area, mtj),
    }
}

/// Pulse shape used for inference: the reference duration (unit duration
/// factor) at the bottom of the velocity table, so skyrmions stay in their
/// zone for dozens of pulses.
pub fn inference_pulse(cal: &DeviceCalibration) -> Result<PulseTrain> {
    let j = cal
        .velocity_points
        .first()
        .map(|p| p.j)
        .ok_or(Error::InvalidCalibration("empty velocity table"))?;
    PulseTrain::forward(1, j, cal.duration_ref)
}

/// Differential crossbar realizing the layer, capacity disabled.
pub fn crossbar_for(layer: &QuantizedLayer, cal: &DeviceCalibration) -> Result<CrossbarConfig> {
    let weights: Vec<Vec<f64>> = (0..layer.rows())
        .map(|i| {
            (0..layer.cols())
                .flat_map(|j| {
                    let (p, n) = layer.device_weights(i, j);
                    [p, n]
                })
                .collect()
        })
        .collect();
    Ok(CrossbarConfig::new(cal.clone(), weights, ReadoutMode::LinearAhe)?.without_capacity())
}

/// Runs one input vector through the layer.
pub fn infer(
    layer: &QuantizedLayer,
    input: &[u32],
    mode: InferMode,
    activation: &Activation,
    cal: &DeviceCalibration,
) -> Result<Vec<f64>> {
    if input.len() != layer.rows() {
        return Err(Error::DimensionMismatch {
            expected: layer.rows(),
            got: input.len(),
        });
    }
    let (pos, neg) = match mode {
        InferMode::Expected => {
            let mut pos = vec![0.0; layer.cols()];
            let mut neg = vec![0.0; layer.cols()];
            for (i, &x) in input.iter().enumerate() {
                for j in 0..layer.cols() {
                    let (p, n) = layer.device_weights(i, j);
                    pos[j] += p * f64::from(x);
                    neg[j] += n * f64::from(x);
                }
            }
            (pos, neg)
        }
        InferMode::Stochastic { model, streams } => {
            let config = crossbar_for(layer, cal)?;
            let pulses = InputVector::from_counts(input, inference_pulse(cal)?);
            let out = run_weighted_sum(&config, &pulses, &model, None, streams)?;
            let pos = out.iter().step_by(2).map(|c| f64::from(c.n_detec)).collect();
            let neg = out.iter().skip(1).step_by(2).map(|c| f64::from(c.n_detec)).collect();
            (pos, neg)
        }
    };
    Ok(pos
        .iter()
        .zip(&neg)
        .map(|(&p, &n)| activate(p, activation, layer, cal) - activate(n, activation, layer, cal))
        .collect())
}

/// Mean output over `trials` stochastic runs; trial `k` uses
/// `streams.child(k)`.
pub fn infer_mean(
    layer: &QuantizedLayer,
    input: &[u32],
    model: StochasticModel,
    activation: &Activation,
    cal: &DeviceCalibration,
    trials: u32,
    streams: Streams,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1"));
    }
    let mut acc = vec![0.0; layer.cols()];
    for k in 0..trials {
        let mode = InferMode::Stochastic {
            model,
            streams: streams.child(u64::from(k)),
        };
        for (a, y) in acc.iter_mut().zip(infer(layer, input, mode, activation, cal)?) {
            *a += y;
        }
    }
    Ok(acc.into_iter().map(|a| a / f64::from(trials)).collect())
}
