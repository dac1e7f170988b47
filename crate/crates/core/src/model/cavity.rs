use serde::{Deserialize, Serialize};

use super::types::CavityCoupling;
use crate::error::Result;

/// Emission into the cavity mode relative to the total decay at one detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityResponse {
    pub beta: f64,
    /// Collection efficiency `η_cav·β + η_rad·(1 − β)`.
    pub eta_x: f64,
    /// Total decay rate over the bulk rate.
    pub purcell: f64,
    pub gamma_cav: f64,
    pub gamma_tot: f64,
}

/// β-factor, collection efficiency and Purcell factor at `detuning` (nm) from
/// a Lorentzian cavity line of FWHM `λ₀/Q`.
pub fn beta_and_efficiency(detuning: f64, coupling: &CavityCoupling) -> Result<CavityResponse> {
    coupling.validate()?;
    let x = 2.0 * detuning / coupling.linewidth();
    let lorentzian = 1.0 / (1.0 + x * x);
    let gamma_cav = coupling.purcell_peak * coupling.gamma_bulk * lorentzian;
    let gamma_bg = coupling.gamma_bulk * coupling.background_inhibition;
    let gamma_tot = gamma_cav + gamma_bg;
    let beta = gamma_cav / gamma_tot;
    Ok(CavityResponse {
        beta,
        eta_x: coupling.eta_cav * beta + coupling.eta_rad * (1.0 - beta),
        purcell: gamma_tot / coupling.gamma_bulk,
        gamma_cav,
        gamma_tot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    #[test]
    fn resonance_maximises_beta_and_purcell() {
        let c = CavityCoupling::default();
        let r0 = beta_and_efficiency(0.0, &c).unwrap();
        assert!((r0.beta - 5.5 / 6.0).abs() < 1e-12);
        for d in [0.1, 0.5, 1.0, 3.0, -2.0] {
            let r = beta_and_efficiency(d, &c).unwrap();
            assert!(r.beta < r0.beta);
            assert!(r.purcell < r0.purcell);
        }
    }

    #[test]
    fn half_width_halves_cavity_rate() {
        let c = CavityCoupling::default();
        let r0 = beta_and_efficiency(0.0, &c).unwrap();
        let r = beta_and_efficiency(c.linewidth() / 2.0, &c).unwrap();
        assert!((r.gamma_cav / r0.gamma_cav - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_term_efficiency_tracks_beta() {
        let c = CavityCoupling {
            eta_rad: 0.0,
            ..CavityCoupling::default()
        };
        for d in [-10.0, -1.0, 0.0, 0.7, 25.0] {
            let r = beta_and_efficiency(d, &c).unwrap();
            assert!((r.eta_x / r.beta - c.eta_cav).abs() < 1e-14);
        }
    }

    #[test]
    fn purcell_excess_is_lorentzian() {
        // Fit a·/(1 + (2(d−d0)/w)²) to sampled F_p(d) − F_p(∞) by linearising
        // 1/y = (1 + 4(d−d0)²/w²)/a, a quadratic in d.
        let c = CavityCoupling::default();
        let floor = c.background_inhibition;
        let ds: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = ds
            .iter()
            .map(|&d| beta_and_efficiency(d, &c).unwrap().purcell - floor)
            .collect();
        let a = DMatrix::from_fn(ds.len(), 3, |i, j| ds[i].powi(j as i32));
        let b = DVector::from_iterator(ys.len(), ys.iter().map(|y| 1.0 / y));
        let coef = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
        let (c0, c1, c2) = (coef[0], coef[1], coef[2]);
        let d0 = -c1 / (2.0 * c2);
        let amp = 1.0 / (c0 - c2 * d0 * d0);
        let width = (4.0 / (c2 * amp)).sqrt();
        let max_res = ds
            .iter()
            .zip(&ys)
            .map(|(&d, &y)| {
                let x = 2.0 * (d - d0) / width;
                (y - amp / (1.0 + x * x)).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_res < 1e-10, "{max_res}");
        assert!((width - c.linewidth()).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn beta_in_open_unit_interval(d in -50.0f64..50.0, q in 10.0f64..5000.0, fp in 0.1f64..50.0, inh in 0.01f64..2.0) {
            let c = CavityCoupling { q_factor: q, purcell_peak: fp, background_inhibition: inh, ..CavityCoupling::default() };
            let r = beta_and_efficiency(d, &c).unwrap();
            prop_assert!(r.beta > 0.0 && r.beta < 1.0);
        }
    }
}
