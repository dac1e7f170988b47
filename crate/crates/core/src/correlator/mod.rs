//! Coincidence histograms from time-tag streams.
//!
//! All pairs (channel 0 click, channel 1 click) within the window are counted,
//! with signed delay `t₁ − t₀`. Peak integration and normalisation follow the
//! pulsed-correlation convention: a window around zero delay is compared with
//! equal windows around multiples of the repetition period.

mod correlate;
mod histogram;
mod peaks;

pub use correlate::{brute_force, correlate, correlate_sliced, MAX_WINDOW_PS};
pub use histogram::Histogram;
pub use peaks::{g2_zero, peak_amplitude_scan, G2Estimate, PeakStats};
