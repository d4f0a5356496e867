//! Geometry-based stochastic model of non-stationary shallow-water acoustic
//! channels.
//!
//! The channel between a transmitter and a receiver in an isovelocity water
//! column is the sum of a line-of-sight path, downward-arrival paths (last
//! bounce at the surface) and upward-arrival paths (last bounce at the
//! bottom). Each reflected path is a cluster of micro rays scattered around
//! its specular ray. Platform motion, random drift and moving surface
//! scatterers make delays, angles and gains time-varying.
//!
//! ```no_run
//! use uwa_channel::{build_realization, evaluate_ctf, preset_scenario, validate, Preset};
//!
//! let scn = validate(preset_scenario(Preset::Custom))?;
//! let real = build_realization(&scn, 0)?;
//! let frame = evaluate_ctf(&real, &scn)?;
//! println!("|H(0, 0)| = {}", frame.at(0, 0).norm());
//! # Ok::<(), uwa_channel::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod motion;
pub mod presets;
pub mod propagation;
pub mod scenario;
pub mod stats;

pub use channel::{build_realization, evaluate_ctf, tap_list, ChannelRealization, CtfFrame, GainModel, Tap};
pub use error::{Error, Result};
pub use presets::{preset_scenario, Preset};
pub use scenario::{validate, ScenarioConfig, ValidatedScenario};
