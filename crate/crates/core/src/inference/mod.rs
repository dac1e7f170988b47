//! Least-squares fitting of the analytic models.

mod grid;
mod hom;
mod lifetime;
mod lm;
mod report;
mod saturation;

pub use hom::{
    area_visibility, decompose_hom_peaks, derived_quantities, fit_hom, hom_expected_counts,
    AreaVisibility, HomCurve, HomFit, HomFitOptions, PeakDecomposition,
};
pub use lifetime::{fit_lifetime, phase_histogram, LifetimeOptions};
pub use lm::{levenberg_marquardt, LmConfig, LmFit};
pub use report::{Estimate, FitReport, StageReport, Weighting};
pub use saturation::{fit_saturation, SaturationPoint};
