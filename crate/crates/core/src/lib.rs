//! Driven two-level ensembles with inhomogeneous resonance broadening.
//!
//! The crate generates ensemble-averaged Rabi oscillation signals, fits them
//! with single- and two-frequency models and computes their spectra. It is
//! organised bottom-up:
//!
//! - [`model`]: closed-form two-level physics and the trace/grid carriers.
//! - [`multilevel`]: density-matrix evolution of the five F=2 Zeeman levels.
//! - [`ensemble`]: detuning distributions and the ensemble average.
//! - [`analysis`]: fits, spectra, sliding-window frequency and detuning scans.
//! - [`fieldmap`]: spatial field model turned into a detuning distribution.
//! - [`io`]: the plain-text and CSV formats read and written by the CLI.
//!
//! Internally every frequency is angular, in rad/ms, and every time is in ms.
//! Anything facing a user (configuration, CSV columns) is an ordinary
//! frequency in kHz; [`units`] holds the one conversion boundary.

// `!(x > 0.0)` is used on purpose: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod fieldmap;
pub mod io;
pub mod model;
pub mod multilevel;
pub mod units;

pub use error::{Error, Result};
pub use model::{DriveParams, OscillationTrace, TimeGrid};
