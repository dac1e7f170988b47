use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::HBAR_UEV_NS;

/// Two-photon interference visibility `γ / (γ + 2γ_dp)`.
pub fn visibility(gamma: f64, gamma_dp: f64) -> Result<f64> {
    ensure(
        gamma > 0.0 && gamma.is_finite(),
        "gamma",
        format!("must be finite and > 0, got {gamma}"),
    )?;
    ensure(
        gamma_dp >= 0.0,
        "gamma_dp",
        format!("must be >= 0, got {gamma_dp}"),
    )?;
    if gamma_dp.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma / (gamma + 2.0 * gamma_dp))
}

/// Lifetime, pure-dephasing time and coherence time (ns).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTimes {
    pub t1: f64,
    pub t2_star: f64,
    pub t2: f64,
}

/// `T1 = 1/γ`, `T2* = 1/γ_dp` and `1/T2 = 1/(2T1) + 1/T2*`.
pub fn coherence_times(gamma: f64, gamma_dp: f64) -> Result<CoherenceTimes> {
    ensure(
        gamma > 0.0 && gamma.is_finite(),
        "gamma",
        format!("must be finite and > 0, got {gamma}"),
    )?;
    ensure(
        gamma_dp > 0.0 && gamma_dp.is_finite(),
        "gamma_dp",
        format!("must be finite and > 0, got {gamma_dp}"),
    )?;
    coherence_times_from_times(1.0 / gamma, 1.0 / gamma_dp)
}

/// Same relation starting from times; `t2_star = +inf` gives `T2 = 2·T1`.
pub fn coherence_times_from_times(t1: f64, t2_star: f64) -> Result<CoherenceTimes> {
    ensure(t1 > 0.0 && t1.is_finite(), "t1", "must be finite and > 0")?;
    ensure(t2_star > 0.0, "t2_star", "must be > 0")?;
    let t2 = 1.0 / (0.5 / t1 + 1.0 / t2_star);
    Ok(CoherenceTimes { t1, t2_star, t2 })
}

/// Decoherence energy `ħ(γ/2 + γ_dp)` in µeV for rates in ns⁻¹.
pub fn decoherence_energy_uev(gamma: f64, gamma_dp: f64) -> f64 {
    HBAR_UEV_NS * (0.5 * gamma + gamma_dp)
}
