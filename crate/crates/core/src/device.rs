// SPDX-License-Identifier: Apache-2.0

//! Calibrated constants and the deterministic control laws of a single
//! nucleation-notch synapse.
//!
//! The synaptic weight (mean skyrmions per pulse) is the product of three
//! separately measured dependences:
//!
//! ```text
//! w(h_z, t, J) = weight_from_field(h_z) * weight_scale_duration(t) * weight_scale_current(J)
//! ```
//!
//! The field law carries the absolute scale (it was measured at the reference
//! pulse); the duration and current factors are dimensionless and equal 1 at
//! the reference pulse.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// One `(current density, velocity)` knot of the velocity table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VelocityPoint {
    /// GA/m^2
    pub j: f64,
    /// m/s
    pub v: f64,
}

/// All phenomenological constants of a device.
///
/// Units: fields in mT, durations in ns, current densities in GA/m^2,
/// voltages in nV (at a 100 uA read current), lengths in um unless the field
/// name says otherwise.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DeviceCalibration {
    /// Skyrmions per pulse per mT. Negative.
    pub weight_field_slope: f64,
    /// Field at which nucleation stops.
    pub field_max: f64,
    /// Below this field elongated stripe domains nucleate.
    pub field_min: f64,
    pub duration_ref: f64,
    /// Duration at which the weight vanishes.
    pub duration_zero: f64,
    pub current_ref: f64,
    pub current_threshold: f64,
    pub velocity_points: Vec<VelocityPoint>,
    /// Skyrmion Hall angle, degrees.
    pub hall_angle: f64,
    pub per_skyrmion_voltage_mean: f64,
    pub per_skyrmion_voltage_std: f64,
    /// nm
    pub skyrmion_diameter: f64,
    pub track_width: f64,
    pub track_length: f64,
    pub notch_depth_fraction: f64,
    /// nm
    pub multilayer_thickness: f64,
}

impl Default for DeviceCalibration {
    fn default() -> Self {
        Self::paper2024()
    }
}

impl DeviceCalibration {
    /// Name of the built-in single-track preset.
    pub const PAPER2024: &'static str = "paper2024";
    /// Name of the two-track demonstration preset.
    pub const PAPER2024_TWOTRACK: &'static str = "paper2024_twotrack";

    /// Constants of the single-track building block.
    pub fn paper2024() -> Self {
        Self {
            weight_field_slope: -0.57,
            field_max: 26.0,
            field_min: 20.0,
            duration_ref: 50.0,
            duration_zero: 30.0,
            current_ref: 171.0,
            current_threshold: 140.0,
            velocity_points: vec![VelocityPoint { j: 150.0, v: 3.0 }, VelocityPoint { j: 200.0, v: 30.0 }],
            hall_angle: 15.0,
            per_skyrmion_voltage_mean: 22.0,
            per_skyrmion_voltage_std: 7.0,
            skyrmion_diameter: 222.0,
            track_width: 6.0,
            track_length: 40.0,
            notch_depth_fraction: 0.17,
            multilayer_thickness: 85.0,
        }
    }

    /// The two-track device was driven at ~116 GA/m^2, below the single-track
    /// velocity table. This preset adds a slow knot at 100 GA/m^2 so the
    /// demonstration pulses stay inside the table.
    pub fn paper2024_twotrack() -> Self {
        let mut cal = Self::paper2024();
        cal.velocity_points.insert(0, VelocityPoint { j: 100.0, v: 1.0 });
        cal
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            Self::PAPER2024 => Some(Self::paper2024()),
            Self::PAPER2024_TWOTRACK => Some(Self::paper2024_twotrack()),
            _ => None,
        }
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.weight_field_slope,
            self.field_max,
            self.field_min,
            self.duration_ref,
            self.duration_zero,
            self.current_ref,
            self.current_threshold,
            self.hall_angle,
            self.per_skyrmion_voltage_mean,
            self.per_skyrmion_voltage_std,
            self.skyrmion_diameter,
            self.track_width,
            self.track_length,
            self.notch_depth_fraction,
            self.multilayer_thickness,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCalibration("all constants must be finite"));
        }
        if self.field_min >= self.field_max {
            return Err(Error::InvalidCalibration("field_min must be below field_max"));
        }
        if self.weight_field_slope >= 0.0 {
            return Err(Error::InvalidCalibration("weight_field_slope must be negative"));
        }
        if self.velocity_points.len() < 2 {
            return Err(Error::InvalidCalibration("velocity table needs at least 2 points"));
        }
        if self
            .velocity_points
            .windows(2)
            .any(|w| w[1].j <= w[0].j || w[1].v <= w[0].v)
        {
            return Err(Error::InvalidCalibration(
                "velocity points must be strictly increasing in j and v",
            ));
        }
        if !(self.notch_depth_fraction > 0.0 && self.notch_depth_fraction < 1.0) {
            return Err(Error::InvalidCalibration("notch_depth_fraction must lie in (0, 1)"));
        }
        if !(0.0..90.0).contains(&self.hall_angle) {
            return Err(Error::InvalidCalibration("hall_angle must lie in [0, 90) degrees"));
        }
        let positive = [
            self.track_width,
            self.track_length,
            self.skyrmion_diameter,
            self.multilayer_thickness,
            self.duration_ref,
        ];
        if positive.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidCalibration(
                "geometry and reference duration must be positive",
            ));
        }
        if self.per_skyrmion_voltage_std < 0.0 {
            return Err(Error::InvalidCalibration("per_skyrmion_voltage_std must be >= 0"));
        }
        Ok(())
    }

    /// Hall deflection per unit longitudinal travel, `tan(hall_angle)`.
    pub fn hall_slope(&self) -> f64 {
        libm::tan(self.hall_angle.to_radians())
    }

    /// Weight at the field floor, the largest programmable weight.
    pub fn max_weight(&self) -> f64 {
        -self.weight_field_slope * (self.field_max - self.field_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Polarity {
    #[default]
    Forward,
    Reverse,
}

/// A train of identical current pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseTrain {
    pub count: u32,
    /// GA/m^2
    pub current_density: f64,
    /// ns
    pub duration: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub polarity: Polarity,
}

impl PulseTrain {
    pub fn new(count: u32, current_density: f64, duration: f64, polarity: Polarity) -> Result<Self> {
        let train = Self {
            count,
            current_density,
            duration,
            polarity,
        };
        train.validate()?;
        Ok(train)
    }

    pub fn forward(count: u32, current_density: f64, duration: f64) -> Result<Self> {
        Self::new(count, current_density, duration, Polarity::Forward)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Precondition("pulse duration must be > 0"));
        }
        if !(self.current_density > 0.0) {
            return Err(Error::Precondition("pulse current density must be > 0"));
        }
        Ok(())
    }

    /// The same pulse shape with a different count.
    pub fn with_count(self, count: u32) -> Self {
        Self { count, ..self }
    }
}

/// Out-of-plane applied field, mT.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FieldSetting {
    pub h_z: f64,
}

impl FieldSetting {
    pub const fn new(h_z: f64) -> Self {
        Self { h_z }
    }
}

/// Output of [`weight_from_field`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldWeight {
    /// Skyrmions per pulse.
    pub weight: f64,
    /// Set when the field was above the cutoff and the weight was clamped to 0.
    pub range_warning: bool,
}

/// Mean skyrmions per pulse at the reference pulse for a given field.
pub fn weight_from_field(cal: &DeviceCalibration, field: FieldSetting) -> Result<FieldWeight> {
    let h_z = field.h_z;
    if h_z < cal.field_min {
        return Err(Error::StripeDomainRegime {
            h_z,
            field_min: cal.field_min,
        });
    }
    if h_z > cal.field_max {
        return Ok(FieldWeight {
            weight: 0.0,
            range_warning: true,
        });
    }
    Ok(FieldWeight {
        weight: (cal.weight_field_slope.abs() * (cal.field_max - h_z)).max(0.0),
        range_warning: false,
    })
}

/// Dimensionless weight factor for the pulse duration. Linear, 1 at
/// `duration_ref`, 0 at or below `duration_zero`, unbounded above.
pub fn weight_scale_duration(cal: &DeviceCalibration, duration: f64) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::Precondition("duration must be > 0"));
    }
    let span = cal.duration_ref - cal.duration_zero;
    if span == 0.0 {
        return Err(Error::DegenerateCalibration("duration_ref equals duration_zero"));
    }
    Ok(((duration - cal.duration_zero) / span).max(0.0))
}

/// Dimensionless weight factor for the current density, quadratic above the
/// nucleation threshold: `(J^2 - J_th^2) / (J_ref^2 - J_th^2)`.
pub fn weight_scale_current(cal: &DeviceCalibration, j: f64) -> Result<f64> {
    if !(j > 0.0) {
        return Err(Error::Precondition("current density must be > 0"));
    }
    if cal.current_ref <= cal.current_threshold {
        return Err(Error::DegenerateCalibration(
            "current_ref must exceed current_threshold",
        ));
    }
    let th2 = cal.current_threshold * cal.current_threshold;
    let ref2 = cal.current_ref * cal.current_ref;
    Ok(((j * j - th2) / (ref2 - th2)).max(0.0))
}

/// Composite weight `w(h_z, t, J)` for a forward pulse shape.
pub fn synaptic_weight(cal: &DeviceCalibration, field: FieldSetting, pulse: &PulseTrain) -> Result<f64> {
    let w = weight_from_field(cal, field)?.weight;
    Ok(w * weight_scale_duration(cal, pulse.duration)? * weight_scale_current(cal, pulse.current_density)?)
}

/// Skyrmion velocity (m/s) by piecewise-linear interpolation of the
/// calibration table. Extrapolation is an error.
pub fn velocity_from_current(cal: &DeviceCalibration, j: f64) -> Result<f64> {
    let pts = &cal.velocity_points;
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidCalibration("empty velocity table")),
    };
    if !(j >= first.j && j <= last.j) {
        return Err(Error::Extrapolation {
            j,
            min: first.j,
            max: last.j,
        });
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if j == a.j {
            return Ok(a.v);
        }
        if j == b.j {
            return Ok(b.v);
        }
        if j > a.j && j < b.j {
            return Ok(a.v + (b.v - a.v) * (j - a.j) / (b.j - a.j));
        }
    }
    Ok(first.v)
}

/// Current density (GA/m^2) of a total current (mA) spread over the track
/// cross-section.
pub fn current_density(total_current_ma: f64, cal: &DeviceCalibration) -> Result<f64> {
    if !(total_current_ma > 0.0) {
        return Err(Error::Precondition("total current must be > 0"));
    }
    // mA / (um * nm) = 1e-3 A / 1e-15 m^2 = 1e12 A/m^2 = 1e3 GA/m^2
    Ok(total_current_ma / (cal.track_width * cal.multilayer_thickness) * 1e3)
}
