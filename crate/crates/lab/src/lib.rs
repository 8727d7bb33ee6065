// SPDX-License-Identifier: Apache-2.0

//! Experiment runner for the skyrmion synapse model.
//!
//! An [`ExperimentSpec`] (TOML) names a calibration preset, a protocol and a
//! seed. [`run_experiment`] writes a self-describing run directory and
//! [`emit_figure_data`] turns it into plot-ready tables. The `skyrmion-lab`
//! binary wraps both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod emit;
mod error;
pub mod matrix;
pub mod run;
pub mod spec;
pub mod sweep;

pub use emit::emit_figure_data;
pub use error::{LabError, Result};
pub use run::{run_experiment, RunOutput};
pub use spec::{ExperimentSpec, Protocol};
