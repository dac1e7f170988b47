//! Two-photon interference coincidence clusters of a pulse-pair HOM setup.
//!
//! Every repetition period produces a cluster of five peaks at offsets
//! `−2δ, −δ, 0, δ, 2δ`. In the central cluster the zero-offset peak carries the
//! interference dip; all other clusters are fully distinguishable.

use super::types::HomModelParams;

/// Peak positions of a cluster in units of δ.
pub const PEAK_OFFSETS: [i32; 5] = [-2, -1, 0, 1, 2];

/// Number of neighbouring clusters summed on each side when evaluating the
/// full model.
pub const CLUSTER_REACH: i32 = 5;

const CENTRAL_WEIGHTS: [f64; 5] = [0.5, 1.0, 1.0, 1.0, 0.5];
// 1:4:6:4:1 in units of A/2: pulses from the previous and following periods
// both contribute to every side cluster.
const SIDE_WEIGHTS: [f64; 5] = [0.5, 2.0, 3.0, 2.0, 0.5];

/// Relative peak weights (in units of the amplitude `A`) of cluster `cluster`.
pub fn hom_cluster_weights(cluster: i32) -> [f64; 5] {
    if cluster == 0 {
        CENTRAL_WEIGHTS
    } else {
        SIDE_WEIGHTS
    }
}

/// Individual contributions of the five peaks of one cluster at delay `tau`.
pub fn hom_peak_components(tau: f64, params: &HomModelParams, cluster: i32) -> [f64; 5] {
    let weights = hom_cluster_weights(cluster);
    let origin = f64::from(cluster) * params.rep_period;
    let mut out = [0.0; 5];
    for (k, (&offset, &w)) in PEAK_OFFSETS.iter().zip(&weights).enumerate() {
        let rel = tau - origin - f64::from(offset) * params.delta;
        let decay = (-params.gamma * rel.abs()).exp();
        out[k] = if cluster == 0 && offset == 0 {
            params.amplitude * decay * (1.0 - params.coherence(rel))
        } else {
            params.amplitude * w * decay
        };
    }
    out
}

/// Coincidence density of a single cluster (no IRF).
pub fn hom_coincidence_density(tau: f64, params: &HomModelParams, cluster: i32) -> f64 {
    hom_peak_components(tau, params, cluster).iter().sum()
}

/// Full un-convolved model: the nearest cluster plus [`CLUSTER_REACH`]
/// neighbours on each side.
pub fn hom_model(tau: f64, params: &HomModelParams) -> f64 {
    let nearest = (tau / params.rep_period).round() as i32;
    (nearest - CLUSTER_REACH..=nearest + CLUSTER_REACH)
        .map(|c| hom_coincidence_density(tau, params, c))
        .sum()
}
