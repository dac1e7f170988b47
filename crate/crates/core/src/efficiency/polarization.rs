use crate::error::{ensure, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    ensure(
        alpha > 0.0 && alpha <= 2.0,
        "alpha",
        format!("must lie in (0, 2], got {alpha}"),
    )
}

/// Fraction of x-polarized intensity `ρ = (1 + r·(2 − α)/α)⁻¹` for mixing
/// `α` and collection ratio `r = η_y/η_x`.
pub fn polarization_fraction(alpha: f64, eta_ratio: f64) -> Result<f64> {
    check_alpha(alpha)?;
    ensure(eta_ratio >= 0.0, "eta_ratio", "must be >= 0")?;
    Ok(1.0 / (1.0 + eta_ratio * (2.0 - alpha) / alpha))
}

/// As [`polarization_fraction`], also accepting `α = 0`, where ρ is taken
/// as its limit 0 (for `r > 0`).
pub fn polarization_fraction_limit(alpha: f64, eta_ratio: f64) -> Result<f64> {
    if alpha == 0.0 && eta_ratio > 0.0 {
        return Ok(0.0);
    }
    polarization_fraction(alpha, eta_ratio)
}

/// Collection ratio `η_y/η_x = (1/ρ − 1)·α/(2 − α)`.
pub fn eta_ratio_from_rho(alpha: f64, rho: f64) -> Result<f64> {
    check_alpha(alpha)?;
    ensure(rho > 0.0 && rho <= 1.0, "rho", "must lie in (0, 1]")?;
    ensure(
        alpha < 2.0,
        "alpha",
        "at alpha = 2 every eta_ratio gives rho = 1",
    )?;
    Ok((1.0 / rho - 1.0) * alpha / (2.0 - alpha))
}

/// Mixing factor `α = 2/(1 + q)` with `q = (1/ρ − 1)/r`.
pub fn alpha_from_rho(rho: f64, eta_ratio: f64) -> Result<f64> {
    ensure(rho > 0.0 && rho <= 1.0, "rho", "must lie in (0, 1]")?;
    ensure(
        eta_ratio > 0.0,
        "eta_ratio",
        "must be > 0 for alpha to be determined",
    )?;
    Ok(2.0 / (1.0 + (1.0 / rho - 1.0) / eta_ratio))
}

/// Upper bound `α ≤ 1 + I_slow/I_fast` from the bi-exponential decay
/// amplitudes; valid when `α ≥ 1`.
pub fn alpha_upper_bound(i_slow: f64, i_fast: f64) -> Result<f64> {
    ensure(i_fast > 0.0, "i_fast", "must be > 0")?;
    ensure(i_slow >= 0.0, "i_slow", "must be >= 0")?;
    Ok(1.0 + i_slow / i_fast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_points() {
        assert_eq!(polarization_fraction(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(polarization_fraction(2.0, 7.3).unwrap(), 1.0);
        assert!(polarization_fraction(0.0, 1.0).is_err());
        assert_eq!(polarization_fraction_limit(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(alpha_upper_bound(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(alpha_upper_bound(3.0, 3.0).unwrap(), 2.0);
    }

    proptest! {
        #[test]
        fn inverses_round_trip(alpha in 0.01f64..1.99, r in 0.01f64..100.0) {
            let rho = polarization_fraction(alpha, r).unwrap();
            let r_back = eta_ratio_from_rho(alpha, rho).unwrap();
            let a_back = alpha_from_rho(rho, r).unwrap();
            prop_assert!((r_back - r).abs() <= 1e-12 * r.max(1.0) * 10.0);
            prop_assert!((a_back - alpha).abs() <= 1e-12);
        }
    }
}
