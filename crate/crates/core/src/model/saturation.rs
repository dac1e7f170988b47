use crate::error::{ensure, Result};

/// Pulsed saturation curve `C_sat·(1 − exp(−P/P_sat))`.
pub fn saturation_curve(power: f64, p_sat: f64, c_sat: f64) -> Result<f64> {
    ensure(p_sat > 0.0, "p_sat", format!("must be > 0, got {p_sat}"))?;
    ensure(power >= 0.0, "power", format!("must be >= 0, got {power}"))?;
    ensure(c_sat >= 0.0, "c_sat", format!("must be >= 0, got {c_sat}"))?;
    Ok(c_sat * -(-power / p_sat).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_power_gives_zero() {
        assert_eq!(saturation_curve(0.0, 46.7, 2.93e5).unwrap(), 0.0);
    }

    #[test]
    fn saturates_at_high_power() {
        let c = saturation_curve(20.0 * 46.7, 46.7, 2.93e5).unwrap();
        assert!((c / 2.93e5 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn evaluates_at_saturation_power() {
        // 2.93e5 · (1 − e⁻¹)
        let c = saturation_curve(46.7, 46.7, 2.93e5).unwrap();
        assert!((c - 1.852e5).abs() < 50.0, "{c}");
    }

    #[test]
    fn rejects_nonpositive_p_sat() {
        assert!(saturation_curve(1.0, 0.0, 1.0).is_err());
        assert!(saturation_curve(1.0, -3.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_concave(p_sat in 1e-3f64..1e3, c_sat in 0.0f64..1e7, p in 0.0f64..5e3, dp in 1e-3f64..50.0) {
            let f = |x: f64| saturation_curve(x, p_sat, c_sat).unwrap();
            let (a, b, c) = (f(p), f(p + dp), f(p + 2.0 * dp));
            prop_assert!(b >= a);
            prop_assert!(c >= b);
            // second difference is non-positive up to rounding
            prop_assert!(a - 2.0 * b + c <= 1e-9 * c_sat.max(1.0));
        }
    }
}
