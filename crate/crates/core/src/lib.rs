//! Photon-statistics toolkit for pulsed solid-state single-photon sources.
//!
//! The crate is organised around the measurement chain:
//!
//! * [`model`] holds the domain types and closed-form models (saturation,
//!   two-photon interference clusters, IRF convolution, cavity β-factor).
//! * [`simulator`] is a Monte Carlo generator of detector time-tag streams for
//!   Hanbury Brown–Twiss and Hong–Ou–Mandel configurations.
//! * [`correlator`] turns time-tag streams into coincidence histograms and
//!   extracts g²(0) and long-delay peak statistics.
//! * [`inference`] fits the analytic models to histograms and power series.
//! * [`efficiency`] evaluates collection/preparation efficiency relations and
//!   their bounds.
//! * [`config`] and [`cli`] wire these together behind the `photonlab` binary.

pub mod cli;
pub mod config;
pub mod correlator;
pub mod efficiency;
pub mod error;
pub mod inference;
pub mod model;
mod serde_f64;
pub mod simulator;

pub use error::{Error, Result};

/// Reduced Planck constant in µeV·ns.
pub const HBAR_UEV_NS: f64 = 0.658_211_956_9;

/// Tool identification written into provenance headers.
pub const TOOL_VERSION: &str = concat!("photonlab ", env!("CARGO_PKG_VERSION"));
