// SPDX-License-Identifier: Apache-2.0

//! Precision and energy figures of merit of a skyrmion weighted sum.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Nucleation energy scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EnergyPreset {
    /// Thermal nucleation as measured in the prototype.
    ThermalMeasured,
    /// Thermal nucleation with an optimized pulse.
    ThermalOptimized,
    /// Voltage-controlled anisotropy nucleation.
    Vcma,
    /// The stability barrier, ~500 kT at room temperature.
    BarrierLimit,
}

impl EnergyPreset {
    pub const ALL: [EnergyPreset; 4] = [
        EnergyPreset::ThermalMeasured,
        EnergyPreset::ThermalOptimized,
        EnergyPreset::Vcma,
        EnergyPreset::BarrierLimit,
    ];

    /// Energy per nucleated skyrmion, J.
    pub fn joules(self) -> f64 {
        match self {
            EnergyPreset::ThermalMeasured => 20e-12,
            EnergyPreset::ThermalOptimized => 10e-12,
            EnergyPreset::Vcma => 100e-15,
            EnergyPreset::BarrierLimit => 2e-18,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnergyPreset::ThermalMeasured => "thermal_measured",
            EnergyPreset::ThermalOptimized => "thermal_optimized",
            EnergyPreset::Vcma => "vcma",
            EnergyPreset::BarrierLimit => "barrier_limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyModel {
    /// J
    pub e_per_skyrmion: f64,
}

impl EnergyModel {
    pub fn new(e_per_skyrmion: f64) -> Result<Self> {
        if !(e_per_skyrmion > 0.0) || !e_per_skyrmion.is_finite() {
            return Err(Error::Precondition("energy per skyrmion must be > 0"));
        }
        Ok(Self { e_per_skyrmion })
    }
}

impl From<EnergyPreset> for EnergyModel {
    fn from(p: EnergyPreset) -> Self {
        Self {
            e_per_skyrmion: p.joules(),
        }
    }
}

/// Relative precision of a sum, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    pub value: f64,
    /// The unclamped formula fell outside `[0, 1]`.
    pub clamped: bool,
}

/// `1 - sqrt(p_bar / (m n_pulse))`: one minus the relative spread of a sum
/// over `m` unit-weight synapses with `n_pulse` pulses each.
pub fn sum_precision(m: u32, n_pulse: u32, p_bar: f64) -> Result<Precision> {
    if m == 0 || n_pulse == 0 {
        return Err(Error::Precondition("m and n_pulse must be >= 1"));
    }
    if !(0.0..=1.0).contains(&p_bar) {
        return Err(Error::Precondition("p_bar must lie in [0, 1]"));
    }
    let raw = 1.0 - libm::sqrt(p_bar / (f64::from(m) * f64::from(n_pulse)));
    Ok(Precision {
        value: raw.clamp(0.0, 1.0),
        clamped: !(0.0..=1.0).contains(&raw),
    })
}

/// Mean nucleation energy of the sum, `m n_pulse E_sk` (J).
pub fn sum_energy(m: u32, n_pulse: u32, model: &EnergyModel) -> Result<f64> {
    if m == 0 || n_pulse == 0 {
        return Err(Error::Precondition("m and n_pulse must be >= 1"));
    }
    Ok(f64::from(m) * f64::from(n_pulse) * model.e_per_skyrmion)
}

/// Energy of one unit-weight synaptic operation of `n_pulse` pulses (J).
pub fn synaptic_op_energy(n_pulse: u32, model: &EnergyModel) -> Result<f64> {
    sum_energy(1, n_pulse, model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub n_pulse: u32,
    pub precision: f64,
    /// J
    pub energy: f64,
}

/// Precision/energy pairs for each pulse count of `n_pulses`.
pub fn pareto_curve<I>(m: u32, p_bar: f64, model: &EnergyModel, n_pulses: I) -> Result<Vec<ParetoPoint>>
where
    I: IntoIterator<Item = u32>,
{
    let points = n_pulses
        .into_iter()
        .map(|n| {
            Ok(ParetoPoint {
                n_pulse: n,
                precision: sum_precision(m, n, p_bar)?.value,
                energy: sum_energy(m, n, model)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::Precondition("pulse range must be non-empty"));
    }
    Ok(points)
}

// Ratios like 2.8 / 0.2 land a few ulps below the integer.
const STEP_EPS: f64 = 1e-9;

/// Distinguishable weight levels when the field is stepped by `step_mt`
/// over `span_mt`: `floor(span / step) + 1`.
pub fn synaptic_state_count(span_mt: f64, step_mt: f64) -> Result<u32> {
    level_count(span_mt, step_mt)
}

/// Distinguishable weight levels for a weight range and a weight precision,
/// both in skyrmions per pulse.
pub fn skyrmion_state_count(weight_range: f64, weight_precision: f64) -> Result<u32> {
    level_count(weight_range, weight_precision)
}

fn level_count(range: f64, step: f64) -> Result<u32> {
    if !(step > 0.0) {
        return Err(Error::Precondition("step must be > 0"));
    }
    if !(range >= 0.0) || !range.is_finite() {
        return Err(Error::Precondition("range must be finite and >= 0"));
    }
    Ok(libm::floor(range / step + STEP_EPS) as u32 + 1)
}
