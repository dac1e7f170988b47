//! Collection, preparation and polarization-mixing efficiency relations.

mod collection;
mod measured;
mod polarization;
mod preparation;
mod report;

pub use collection::{eta_absolute, eta_absolute_bounds, eta_relative, EfficiencyEstimate, Method};
pub use measured::{propagate, Interval, Measured, Propagation};
pub use polarization::{
    alpha_from_rho, alpha_upper_bound, eta_ratio_from_rho, polarization_fraction,
    polarization_fraction_limit,
};
pub use preparation::{preparation_bounds, preparation_bounds_with_qe_ratio, PreparationBounds};
pub use report::EfficiencyReport;
