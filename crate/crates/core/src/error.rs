// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Field below the floor where elongated stripe domains nucleate instead
    /// of skyrmions.
    #[error("field {h_z} mT is below the stripe-domain floor {field_min} mT")]
    StripeDomainRegime { h_z: f64, field_min: f64 },
    #[error("degenerate calibration: {0}")]
    DegenerateCalibration(&'static str),
    #[error("invalid calibration: {0}")]
    InvalidCalibration(&'static str),
    #[error("current density {j} GA/m^2 outside calibrated range [{min}, {max}]")]
    Extrapolation { j: f64, min: f64, max: f64 },
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
    #[error("singular fit: all abscissae are equal")]
    SingularFit,
    #[error("voltage ratio {0} must lie in (0, 1)")]
    InvalidRatio(f64),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
}
