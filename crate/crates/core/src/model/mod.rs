//! Domain types and closed-form models.

mod cavity;
mod coherence;
mod hom;
mod irf;
mod saturation;
mod types;

pub use cavity::{beta_and_efficiency, CavityResponse};
pub use coherence::{
    coherence_times, coherence_times_from_times, decoherence_energy_uev, visibility, CoherenceTimes,
};
pub use hom::{
    hom_cluster_weights, hom_coincidence_density, hom_model, hom_peak_components, CLUSTER_REACH,
    PEAK_OFFSETS,
};
pub use irf::{convolve_with_irf, gaussian_cell_kernel, SampledCurve};
pub use saturation::saturation_curve;
pub use types::{
    BackgroundStatistics, Beating, CavityCoupling, DetectionChain, EmitterSpec, ExcitationSchedule,
    HomModelParams,
};
