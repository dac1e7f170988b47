use serde::{Deserialize, Serialize};

use super::measured::{propagate, Interval, Measured, Propagation};
use crate::error::{check_probability, ensure, Result};

/// Bounds on the neutral-exciton preparation efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparationBounds {
    /// Internal quantum efficiency `(γ_fast − γ_nrad)/γ_fast`.
    pub eta_qe: Measured,
    /// Bounds on `ξ_X2/ξ_X`.
    pub xi_ratio: Interval<f64>,
    /// Bounds on the neutral-exciton occupation `ξ_X/(ξ_X + ξ_X2)`.
    pub occupation: Interval<f64>,
    /// Occupation bounds times `η_QE`.
    pub epsilon: Interval<Measured>,
}

/// Preparation-efficiency bounds from the charged/neutral intensity ratio
/// `i = I_X2/I_X` and the decay rates (ns⁻¹).
///
/// The polarization coupling ratio of the two lines lies between 1 and 2, so
/// `ξ_X2/ξ_X ∈ [i/2, i]` and the occupation lies in `[1/(1+i), 1/(1+i/2)]`.
/// Both lines are assumed to share the same `η_QE`.
pub fn preparation_bounds(
    i_x2_over_i_x: f64,
    gamma_fast: Measured,
    gamma_nrad: Measured,
    propagation: Propagation,
) -> Result<PreparationBounds> {
    preparation_bounds_with_qe_ratio(i_x2_over_i_x, gamma_fast, gamma_nrad, 1.0, propagation)
}

/// As [`preparation_bounds`], with the charged line's quantum efficiency
/// given as `qe_ratio = η_QE,X2/η_QE,X`; `ξ_X2/ξ_X ∈ [i/(2r), i/r]`.
pub fn preparation_bounds_with_qe_ratio(
    i_x2_over_i_x: f64,
    gamma_fast: Measured,
    gamma_nrad: Measured,
    qe_ratio: f64,
    propagation: Propagation,
) -> Result<PreparationBounds> {
    ensure(
        qe_ratio > 0.0 && qe_ratio.is_finite(),
        "qe_ratio",
        "must be finite and > 0",
    )?;
    ensure(i_x2_over_i_x >= 0.0, "i_x2_over_i_x", "must be >= 0")?;
    ensure(gamma_fast.value > 0.0, "gamma_fast", "must be > 0")?;
    ensure(gamma_nrad.value >= 0.0, "gamma_nrad", "must be >= 0")?;
    ensure(
        gamma_nrad.value < gamma_fast.value,
        "gamma_nrad",
        format!(
            "must be below gamma_fast ({} >= {})",
            gamma_nrad.value, gamma_fast.value
        ),
    )?;
    let eta_qe = propagate(
        |x| (x[0] - x[1]) / x[0],
        &[gamma_fast, gamma_nrad],
        propagation,
    )?;
    check_probability("eta_qe", eta_qe.value)?;
    let i = i_x2_over_i_x / qe_ratio;
    let occupation = Interval {
        lower: 1.0 / (1.0 + i),
        upper: 1.0 / (1.0 + i / 2.0),
    };
    let scale = |occ: f64| -> Result<Measured> {
        let m = Measured::new(occ * eta_qe.value, occ * eta_qe.error);
        check_probability("epsilon", m.value)?;
        Ok(m)
    };
    Ok(PreparationBounds {
        eta_qe,
        xi_ratio: Interval {
            lower: i / 2.0,
            upper: i,
        },
        epsilon: Interval {
            lower: scale(occupation.lower)?,
            upper: scale(occupation.upper)?,
        },
        occupation,
    })
}
