// SPDX-License-Identifier: Apache-2.0

//! Electrical readout of the detection zone.
//!
//! The anomalous Hall voltage is linear in the number of skyrmions in the
//! zone. A magnetic tunnel junction on the zone gives a monotone, saturating
//! response instead and serves as the activation function.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::device::{DeviceCalibration, PulseTrain};
use crate::nucleation::{draw, StochasticModel};
use crate::rng::Streams;
use crate::transport::{DetectionZone, Notch, SkyrmionPopulation};
use crate::{linear_fit, Error, Result};

/// Read current at which the per-skyrmion voltage is calibrated, uA.
pub const REFERENCE_READ_CURRENT: f64 = 100.0;

/// Measurement phases, in protocol order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    Baseline,
    Pulsing,
    /// Hold after a pulsing phase, checking voltage stability.
    Stability,
    Reset,
    Post,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Baseline => "baseline",
            Phase::Pulsing => "pulsing",
            Phase::Stability => "stability",
            Phase::Reset => "reset",
            Phase::Post => "post",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "baseline" => Phase::Baseline,
            "pulsing" => Phase::Pulsing,
            "stability" => Phase::Stability,
            "reset" => Phase::Reset,
            "post" => Phase::Post,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub index: u32,
    pub phase: Phase,
    /// nV
    pub delta_v: f64,
    pub n_detec: u32,
}

/// Time-ordered voltage samples of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTrace {
    pub samples: Vec<Sample>,
    /// uA
    pub read_current: f64,
}

impl MeasurementTrace {
    pub fn new(read_current: f64) -> Self {
        Self {
            samples: Vec::new(),
            read_current,
        }
    }

    pub fn push(&mut self, phase: Phase, delta_v: f64, n_detec: u32) {
        let index = self.samples.last().map_or(0, |s| s.index + 1);
        self.samples.push(Sample {
            index,
            phase,
            delta_v,
            n_detec,
        });
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Mean voltage of each maximal run of consecutive `phase` samples.
    pub fn segment_means(&self, phase: Phase) -> Vec<f64> {
        let mut means = Vec::new();
        let (mut sum, mut n) = (0.0, 0u32);
        for s in &self.samples {
            if s.phase == phase {
                sum += s.delta_v;
                n += 1;
            } else if n > 0 {
                means.push(sum / f64::from(n));
                (sum, n) = (0.0, 0);
            }
        }
        if n > 0 {
            means.push(sum / f64::from(n));
        }
        means
    }
}

/// Post-averaging measurement noise.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadoutNoise {
    /// Standard deviation of one averaged voltage sample, nV.
    pub sigma_meas: f64,
    /// Add the per-skyrmion voltage spread of the calibration.
    pub per_skyrmion: bool,
}

impl Default for ReadoutNoise {
    fn default() -> Self {
        Self {
            sigma_meas: 25.0,
            per_skyrmion: true,
        }
    }
}

impl ReadoutNoise {
    /// Only the measurement noise; skyrmion contributions are exact.
    pub fn measurement_only(sigma_meas: f64) -> Self {
        Self {
            sigma_meas,
            per_skyrmion: false,
        }
    }
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// Hall voltage change (nV) for `n_detec` skyrmions at the reference read
/// current.
pub fn hall_voltage<R: Rng + ?Sized>(
    n_detec: u32,
    cal: &DeviceCalibration,
    noise: Option<&ReadoutNoise>,
    rng: &mut R,
) -> f64 {
    hall_voltage_at(n_detec, cal, REFERENCE_READ_CURRENT, noise, rng)
}

/// [`hall_voltage`] at another read current (uA); the signal scales
/// linearly with it.
pub fn hall_voltage_at<R: Rng + ?Sized>(
    n_detec: u32,
    cal: &DeviceCalibration,
    read_current: f64,
    noise: Option<&ReadoutNoise>,
    rng: &mut R,
) -> f64 {
    let scale = read_current / REFERENCE_READ_CURRENT;
    let mut v = f64::from(n_detec) * cal.per_skyrmion_voltage_mean;
    if let Some(noise) = noise {
        if noise.per_skyrmion && n_detec > 0 && cal.per_skyrmion_voltage_std > 0.0 {
            v += cal.per_skyrmion_voltage_std * libm::sqrt(f64::from(n_detec)) * normal(rng);
        }
        v *= scale;
        if noise.sigma_meas > 0.0 {
            v += noise.sigma_meas * normal(rng);
        }
        v
    } else {
        v * scale
    }
}

/// A single-notch track wired to a Hall cross.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapseTrack {
    pub cal: DeviceCalibration,
    /// Mean skyrmions per pulse.
    pub weight: f64,
    pub model: StochasticModel,
    pub notch: Notch,
    pub zone: DetectionZone,
    /// Shape of every input pulse; its count is ignored.
    pub pulse: PulseTrain,
    pub noise: Option<ReadoutNoise>,
    /// uA
    pub read_current: f64,
}

impl SynapseTrack {
    pub fn validate(&self) -> Result<()> {
        self.cal.validate()?;
        self.model.validate()?;
        self.pulse.validate()?;
        if !(self.weight >= 0.0) || !self.weight.is_finite() {
            return Err(Error::Precondition("weight must be finite and >= 0"));
        }
        if !self.zone.fits(self.cal.track_length, self.cal.track_width) {
            return Err(Error::Precondition("detection zone must lie within the track"));
        }
        if !(self.read_current > 0.0) {
            return Err(Error::Precondition("read current must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolStep {
    pub phase: Phase,
    pub count: u32,
}

/// Ordered measurement sequence with an optional injected linear drift.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolSpec {
    pub steps: Vec<ProtocolStep>,
    /// nV added per sample index.
    #[cfg_attr(feature = "serde", serde(default))]
    pub drift_per_index: f64,
    /// nV added to every sample.
    #[cfg_attr(feature = "serde", serde(default))]
    pub offset: f64,
}

impl ProtocolSpec {
    /// Baseline samples, one sample after each pulse, one saturating reset,
    /// then post-reset samples.
    pub fn standard(baseline: u32, pulses: u32, post: u32) -> Self {
        let step = |phase, count| ProtocolStep { phase, count };
        Self {
            steps: alloc::vec![
                step(Phase::Baseline, baseline),
                step(Phase::Pulsing, pulses),
                step(Phase::Reset, 1),
                step(Phase::Post, post),
            ],
            drift_per_index: 0.0,
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Protocol("protocol has no steps".into()));
        }
        for w in self.steps.windows(2) {
            if w[1].phase < w[0].phase {
                return Err(Error::Protocol(format!(
                    "phase {} cannot follow {}",
                    w[1].phase.as_str(),
                    w[0].phase.as_str()
                )));
            }
        }
        Ok(())
    }
}

/// Runs a measurement sequence on one track.
///
/// Nucleation draws from `streams.stream(0)` and readout noise from
/// `streams.stream(1)`, so toggling noise leaves the skyrmion dynamics
/// unchanged.
pub fn measure_protocol(device: &SynapseTrack, spec: &ProtocolSpec, streams: Streams) -> Result<MeasurementTrace> {
    device.validate()?;
    spec.validate()?;
    let (trace, _) = run_protocol(device, spec, streams, |_, _| {})?;
    Ok(trace)
}

/// [`measure_protocol`] that also reports the population after each pulse.
pub fn run_protocol<F>(
    device: &SynapseTrack,
    spec: &ProtocolSpec,
    streams: Streams,
    mut on_pulse: F,
) -> Result<(MeasurementTrace, SkyrmionPopulation)>
where
    F: FnMut(u32, &SkyrmionPopulation),
{
    device.validate()?;
    spec.validate()?;
    let mut nucleation_rng = streams.stream(0);
    let mut noise_rng = streams.stream(1);
    let mut pop = SkyrmionPopulation::new(0, &device.cal);
    let mut trace = MeasurementTrace::new(device.read_current);
    let one = device.pulse.with_count(1);
    let mut pulse_index = 0u32;
    for step in &spec.steps {
        for _ in 0..step.count {
            match step.phase {
                Phase::Pulsing => {
                    let count = draw(device.weight, device.model.p_bar, &mut nucleation_rng);
                    pop.nucleate(count, device.notch);
                    pop.advance(&one, &device.cal)?;
                    pop.apply_capacity(&device.zone);
                    on_pulse(pulse_index, &pop);
                    pulse_index += 1;
                }
                Phase::Reset => pop.field_reset(),
                Phase::Baseline | Phase::Stability | Phase::Post => {}
            }
            let n = pop.count_in_zone(&device.zone);
            let index = trace.samples.len() as f64;
            let v = hall_voltage_at(
                n,
                &device.cal,
                device.read_current,
                device.noise.as_ref(),
                &mut noise_rng,
            ) + spec.offset
                + spec.drift_per_index * index;
            trace.push(step.phase, v, n);
        }
    }
    Ok((trace, pop))
}

/// Removes a linear-in-index drift fitted on the baseline and post samples.
pub fn drift_correct(trace: &MeasurementTrace) -> Result<MeasurementTrace> {
    let reference: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .filter(|s| matches!(s.phase, Phase::Baseline | Phase::Post))
        .map(|s| (f64::from(s.index), s.delta_v))
        .collect();
    if reference.len() < 2 {
        return Err(Error::InsufficientData(
            "drift correction needs 2 baseline/post samples",
        ));
    }
    let fit = linear_fit(&reference)?;
    let mut out = trace.clone();
    for s in &mut out.samples {
        s.delta_v -= fit.slope * f64::from(s.index) + fit.intercept;
    }
    Ok(out)
}

/// Junction stacked on the detection zone.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MtjConfig {
    /// Ohm
    pub r_parallel: f64,
    /// `R_AP = R_P (1 + tmr)`
    pub tmr: f64,
    /// um^2
    pub junction_area: f64,
    /// uA
    pub read_current: f64,
}

impl Default for MtjConfig {
    fn default() -> Self {
        Self {
            r_parallel: 1000.0,
            tmr: 1.0,
            junction_area: 36.0,
            read_current: 10.0,
        }
    }
}

impl MtjConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_parallel > 0.0) {
            return Err(Error::Precondition("r_parallel must be > 0"));
        }
        if !(self.tmr >= 0.0) {
            return Err(Error::Precondition("tmr must be >= 0"));
        }
        if !(self.junction_area > 0.0) {
            return Err(Error::Precondition("junction_area must be > 0"));
        }
        Ok(())
    }

    /// Output at zero and full coverage, mV.
    pub fn range(&self) -> (f64, f64) {
        let v0 = self.read_current * self.r_parallel * 1e-3;
        (v0, v0 * (1.0 + self.tmr))
    }
}

/// Skyrmion footprint `pi d^2 / 4`, um^2.
pub fn skyrmion_area(cal: &DeviceCalibration) -> f64 {
    let d = cal.skyrmion_diameter * 1e-3;
    core::f64::consts::PI * d * d / 4.0
}

/// Junction output (mV) at reversed-area fraction `x`, clamped to `[0, 1]`.
/// The parallel and antiparallel areas conduct side by side.
pub fn mtj_output(x: f64, mtj: &MtjConfig) -> f64 {
    let x = x.clamp(0.0, 1.0);
    // Parallel conduction: R(x) = R_P (1 + tmr) / (1 + tmr (1 - x)); uA * Ohm = uV.
    mtj.read_current * mtj.r_parallel * (1.0 + mtj.tmr) / (1.0 + mtj.tmr * (1.0 - x)) * 1e-3
}

/// Junction output (mV) for `n_detec` skyrmions under it.
pub fn mtj_activation(n_detec: u32, mtj: &MtjConfig, cal: &DeviceCalibration) -> f64 {
    let x = (f64::from(n_detec) * skyrmion_area(cal) / mtj.junction_area).min(1.0);
    mtj_output(x, mtj)
}

/// Voltage of a fully reversed detection zone implied by a per-skyrmion
/// voltage and a diameter (nm), for circular uniformly reversed skyrmions.
pub fn full_reversal_voltage(delta_v_per_sk: f64, diameter_nm: f64, zone: &DetectionZone) -> f64 {
    let d = diameter_nm * 1e-3;
    delta_v_per_sk * zone.area() / (core::f64::consts::PI * d * d / 4.0)
}

/// Skyrmion diameter (nm) from `dV_sk / dV_full = (pi d^2 / 4) / A_zone`.
pub fn estimate_diameter(delta_v_per_sk: f64, delta_v_full_reversal: f64, zone: &DetectionZone) -> Result<f64> {
    if !(delta_v_full_reversal > 0.0) || !(delta_v_per_sk >= 0.0) {
        return Err(Error::Precondition("voltages must be positive"));
    }
    let ratio = delta_v_per_sk / delta_v_full_reversal;
    if ratio >= 1.0 {
        return Err(Error::InvalidRatio(ratio));
    }
    Ok(libm::sqrt(4.0 * zone.area() * ratio / core::f64::consts::PI) * 1e3)
}

/// Diameters at `dV_sk -/+ dv_spread`, the interval a voltage uncertainty
/// maps to.
pub fn diameter_interval(
    delta_v_per_sk: f64,
    dv_spread: f64,
    delta_v_full_reversal: f64,
    zone: &DetectionZone,
) -> Result<(f64, f64)> {
    let lo = estimate_diameter((delta_v_per_sk - dv_spread).max(0.0), delta_v_full_reversal, zone)?;
    let hi = estimate_diameter(delta_v_per_sk + dv_spread, delta_v_full_reversal, zone)?;
    Ok((lo, hi))
}
