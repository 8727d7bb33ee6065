// SPDX-License-Identifier: Apache-2.0

//! Stochastic device model for skyrmion-based neuromorphic weighted sums.
//!
//! A synapse is a nucleation notch on a magnetic multilayer track. Every input
//! current pulse nucleates a (random) number of skyrmions whose mean, the
//! synaptic weight, is set by the out-of-plane field, the pulse duration and
//! the current density. Skyrmions drift along an oblique trajectory into a
//! Hall-cross detection zone, where the anomalous Hall voltage is linear in
//! their count. Tracks wired in parallel add their Hall voltages, so the
//! readout is the weighted sum `sum_i w_i * N_pulse_i`.
//!
//! Module map:
//!
//! - [`device`]: calibrated constants and the deterministic control laws.
//! - [`nucleation`]: per-pulse sampling, the `sqrt(p/N)` fluctuation law and
//!   estimators.
//! - [`transport`]: point-particle kinematics, erase paths and the detection
//!   zone.
//! - [`readout`]: Hall and MTJ readout, measurement protocols, drift
//!   correction.
//! - [`crossbar`]: `M x L` arrays and the two-track demonstration sequence.
//! - [`analysis`]: precision/energy figures of merit.
//! - [`netmap`]: mapping signed network weights onto differential columns.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is on. All
//! floating point math goes through `libm` so results are bit-identical with
//! and without `std`.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod crossbar;
pub mod device;
mod error;
mod fit;
pub mod netmap;
pub mod nucleation;
pub mod readout;
pub mod rng;
pub mod transport;

pub use error::{Error, Result};
pub use fit::{linear_fit, LinearFit};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
