use serde::{Deserialize, Serialize};

use super::measured::{propagate, Interval, Measured, Propagation};
use crate::error::{check_probability, ensure, Result};

/// Which efficiency route produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Ratio of saturated count rates against a reference emitter.
    Relative,
    /// Count rate over setup transmission and repetition rate.
    Absolute,
}

/// A collection efficiency together with the assumption it rests on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyEstimate {
    pub eta: Measured,
    pub method: Method,
    pub assumption: String,
}

/// Collection efficiency `η = 2·C_sat / (η_setup · αε · Γ)` from the saturated
/// count rate (s⁻¹), setup transmission and repetition rate (s⁻¹).
pub fn eta_absolute(
    c_sat: Measured,
    eta_setup: Measured,
    rep_rate: f64,
    alpha_eps: Measured,
    propagation: Propagation,
) -> Result<EfficiencyEstimate> {
    ensure(c_sat.value > 0.0, "c_sat", "must be > 0")?;
    ensure(eta_setup.value > 0.0, "eta_setup", "must be > 0")?;
    check_probability("eta_setup", eta_setup.value)?;
    ensure(rep_rate > 0.0, "rep_rate", "must be > 0")?;
    ensure(
        alpha_eps.value > 0.0 && alpha_eps.value <= 2.0,
        "alpha_eps",
        "must lie in (0, 2]",
    )?;
    let eta = propagate(
        |x| 2.0 * x[0] / (x[1] * x[2] * rep_rate),
        &[c_sat, eta_setup, alpha_eps],
        propagation,
    )?;
    check_probability("eta_x", eta.value)?;
    let assumption = if alpha_eps.value == 1.0 && alpha_eps.error == 0.0 {
        "alpha_X*eps_X = 1".to_string()
    } else {
        format!("alpha_X*eps_X = {}", alpha_eps.value)
    };
    Ok(EfficiencyEstimate {
        eta,
        method: Method::Absolute,
        assumption,
    })
}

/// Absolute efficiency bounds: the upper `αε` gives the lower `η` and vice
/// versa.
pub fn eta_absolute_bounds(
    c_sat: Measured,
    eta_setup: Measured,
    rep_rate: f64,
    alpha_eps: Interval<Measured>,
    propagation: Propagation,
) -> Result<Interval<EfficiencyEstimate>> {
    ensure(
        alpha_eps.lower.value <= alpha_eps.upper.value,
        "alpha_eps",
        "lower bound exceeds upper bound",
    )?;
    Ok(Interval {
        lower: eta_absolute(c_sat, eta_setup, rep_rate, alpha_eps.upper, propagation)?,
        upper: eta_absolute(c_sat, eta_setup, rep_rate, alpha_eps.lower, propagation)?,
    })
}

/// Relative collection efficiency `(C_qd / C_bulk) · η_bulk`, assuming equal
/// preparation and mixing for both emitters.
pub fn eta_relative(
    c_sat_qd: Measured,
    c_sat_bulk: Measured,
    eta_bulk: Measured,
    propagation: Propagation,
) -> Result<EfficiencyEstimate> {
    ensure(c_sat_qd.value > 0.0, "c_sat_qd", "must be > 0")?;
    ensure(c_sat_bulk.value > 0.0, "c_sat_bulk", "must be > 0")?;
    ensure(eta_bulk.value > 0.0, "eta_bulk", "must be > 0")?;
    check_probability("eta_bulk", eta_bulk.value)?;
    let eta = propagate(
        |x| x[0] / x[1] * x[2],
        &[c_sat_qd, c_sat_bulk, eta_bulk],
        propagation,
    )?;
    check_probability("eta_x", eta.value)?;
    Ok(EfficiencyEstimate {
        eta,
        method: Method::Relative,
        assumption: "alpha_X*eps_X/eps_bulk = 1".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn linear_in_count_rate() {
        let a = eta_absolute(1e5.into(), 0.1.into(), 8e7, 1.0.into(), Propagation::Linear).unwrap();
        let b = eta_absolute(2e5.into(), 0.1.into(), 8e7, 1.0.into(), Propagation::Linear).unwrap();
        assert!((b.eta.value / a.eta.value - 2.0).abs() < 1e-12);
        assert_eq!(a.assumption, "alpha_X*eps_X = 1");
    }

    #[test]
    fn unphysical_efficiency_is_an_error() {
        let r = eta_absolute(
            1e7.into(),
            0.01.into(),
            8e7,
            1.0.into(),
            Propagation::Linear,
        );
        assert!(matches!(r, Err(Error::ProbabilityOutOfRange { .. })));
    }

    #[test]
    fn identity_ratio() {
        let r = eta_relative(5e3.into(), 5e3.into(), 0.0079.into(), Propagation::Linear).unwrap();
        assert!((r.eta.value - 0.0079).abs() < 1e-15);
        assert_eq!(r.method, Method::Relative);
    }
}
