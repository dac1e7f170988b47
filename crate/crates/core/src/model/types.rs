use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Rates and branching probabilities of a quantum-dot emitter.
///
/// Decay rates are in ns⁻¹, blinking rates in µs⁻¹. `gamma_dp` may be
/// `+inf` to describe fully distinguishable photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmitterSpec {
    pub gamma_fast: f64,
    pub gamma_slow: f64,
    pub gamma_nrad: f64,
    pub gamma_dp: f64,
    /// Fine-structure beat angular frequency (ns⁻¹); `None` disables beating.
    pub fss_beat: Option<f64>,
    /// Mean neutral-exciton preparation per excitation.
    pub xi_x: f64,
    /// Mean charged-exciton preparation per excitation.
    pub xi_x2: f64,
    /// Fraction of neutral-exciton photons emitted with the slow rate.
    pub slow_fraction: f64,
    pub blink_off_rate: f64,
    pub blink_on_rate: f64,
}

impl Default for EmitterSpec {
    fn default() -> Self {
        Self {
            gamma_fast: 0.62,
            gamma_slow: 0.24,
            gamma_nrad: 0.0,
            gamma_dp: 0.0,
            fss_beat: None,
            xi_x: 1.0,
            xi_x2: 0.0,
            slow_fraction: 0.0,
            blink_off_rate: 0.0,
            blink_on_rate: 0.0,
        }
    }
}

fn rate(name: &str, value: f64) -> Result<()> {
    ensure(
        value >= 0.0,
        name,
        format!("rate must be >= 0, got {value}"),
    )
}

impl EmitterSpec {
    pub fn validate(&self) -> Result<()> {
        rate("emitter.gamma_fast", self.gamma_fast)?;
        ensure(
            self.gamma_fast.is_finite(),
            "emitter.gamma_fast",
            "must be finite",
        )?;
        rate("emitter.gamma_slow", self.gamma_slow)?;
        rate("emitter.gamma_nrad", self.gamma_nrad)?;
        rate("emitter.gamma_dp", self.gamma_dp)?;
        rate("emitter.blink_off_rate", self.blink_off_rate)?;
        rate("emitter.blink_on_rate", self.blink_on_rate)?;
        ensure(
            self.gamma_fast > self.gamma_slow,
            "emitter.gamma_fast",
            format!(
                "must exceed gamma_slow ({} <= {})",
                self.gamma_fast, self.gamma_slow
            ),
        )?;
        ensure(
            self.gamma_fast > self.gamma_nrad,
            "emitter.gamma_nrad",
            format!(
                "must be below gamma_fast ({} >= {})",
                self.gamma_nrad, self.gamma_fast
            ),
        )?;
        if let Some(beat) = self.fss_beat {
            ensure(
                beat >= 0.0 && beat.is_finite(),
                "emitter.fss_beat",
                "must be finite and >= 0",
            )?;
        }
        ensure(
            self.blink_off_rate == 0.0 || self.blink_on_rate > 0.0,
            "emitter.blink_on_rate",
            "must be > 0 when blink_off_rate > 0",
        )?;
        ensure(self.xi_x >= 0.0, "emitter.xi_x", "must be >= 0")?;
        ensure(self.xi_x2 >= 0.0, "emitter.xi_x2", "must be >= 0")?;
        ensure(
            self.xi_x + self.xi_x2 <= 1.0 + 1e-12,
            "emitter.xi_x2",
            format!("xi_x + xi_x2 = {} exceeds 1", self.xi_x + self.xi_x2),
        )?;
        ensure(
            (0.0..1.0).contains(&self.slow_fraction),
            "emitter.slow_fraction",
            "must lie in [0, 1)",
        )?;
        ensure(
            self.slow_fraction == 0.0 || self.gamma_slow > 0.0,
            "emitter.gamma_slow",
            "must be > 0 when slow_fraction > 0",
        )?;
        Ok(())
    }

    /// Internal quantum efficiency `(γ_fast − γ_nrad) / γ_fast`.
    pub fn eta_qe(&self) -> f64 {
        (self.gamma_fast - self.gamma_nrad) / self.gamma_fast
    }

    pub fn blinking_enabled(&self) -> bool {
        self.blink_off_rate > 0.0
    }

    /// Stationary probability of the bright state.
    pub fn on_fraction(&self) -> f64 {
        if self.blinking_enabled() {
            self.blink_on_rate / (self.blink_on_rate + self.blink_off_rate)
        } else {
            1.0
        }
    }
}

/// Pulsed excitation timing. Times in ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationSchedule {
    pub rep_period: f64,
    pub pulses_per_period: u32,
    /// Separation of the two pulses of a period in HOM mode.
    pub intra_delay: f64,
    /// Excitation power in units of the saturation power.
    pub power_ratio: f64,
}

impl Default for ExcitationSchedule {
    fn default() -> Self {
        Self::hbt(1e3 / 76.0, 1.0)
    }
}

impl ExcitationSchedule {
    pub fn hbt(rep_period: f64, power_ratio: f64) -> Self {
        Self {
            rep_period,
            pulses_per_period: 1,
            intra_delay: 0.0,
            power_ratio,
        }
    }

    pub fn hom(rep_period: f64, intra_delay: f64, power_ratio: f64) -> Self {
        Self {
            rep_period,
            pulses_per_period: 2,
            intra_delay,
            power_ratio,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.rep_period > 0.0 && self.rep_period.is_finite(),
            "schedule.rep_period",
            "must be finite and > 0",
        )?;
        ensure(
            matches!(self.pulses_per_period, 1 | 2),
            "schedule.pulses_per_period",
            "must be 1 (HBT) or 2 (HOM)",
        )?;
        ensure(
            self.intra_delay >= 0.0 && self.intra_delay < self.rep_period / 2.0,
            "schedule.intra_delay",
            format!("must lie in [0, rep_period/2), got {}", self.intra_delay),
        )?;
        ensure(
            self.power_ratio >= 0.0,
            "schedule.power_ratio",
            "must be >= 0",
        )
    }

    /// Probability that a pulse creates an excitation, `1 − exp(−P/P_sat)`.
    pub fn excitation_probability(&self) -> f64 {
        -(-self.power_ratio).exp_m1()
    }
}

/// Photon-number statistics of the uncorrelated background lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundStatistics {
    /// Poisson-distributed photon number per pulse (g² = 1).
    #[default]
    Poissonian,
    /// Bose–Einstein photon number per pulse (g² = 2).
    Chaotic,
}

/// Optical and detector chain after the emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionChain {
    pub eta_first_lens: f64,
    pub eta_setup: f64,
    /// Further transmissions applied one after another after `eta_setup`.
    pub extra_transmissions: Vec<f64>,
    /// Polarization mixing; a photon passes the polarizer with probability `alpha_mix / 2`.
    pub alpha_mix: f64,
    /// Fraction of detected photons originating from uncorrelated lines.
    pub background_fraction: f64,
    pub background_statistics: BackgroundStatistics,
    /// Dark counts per detector in s⁻¹.
    pub dark_count_rate: f64,
    /// Gaussian timing jitter of a single detector (ns).
    pub irf_sigma: f64,
}

impl Default for DetectionChain {
    fn default() -> Self {
        Self {
            eta_first_lens: 1.0,
            eta_setup: 1.0,
            extra_transmissions: Vec::new(),
            alpha_mix: 2.0,
            background_fraction: 0.0,
            background_statistics: BackgroundStatistics::Poissonian,
            dark_count_rate: 0.0,
            irf_sigma: 0.0,
        }
    }
}

fn probability(name: &str, value: f64) -> Result<()> {
    ensure(
        (0.0..=1.0).contains(&value),
        name,
        format!("probability must lie in [0, 1], got {value}"),
    )
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        probability("chain.eta_first_lens", self.eta_first_lens)?;
        probability("chain.eta_setup", self.eta_setup)?;
        for &t in &self.extra_transmissions {
            probability("chain.extra_transmissions", t)?;
        }
        ensure(
            (0.0..=2.0).contains(&self.alpha_mix),
            "chain.alpha_mix",
            "must lie in [0, 2]",
        )?;
        ensure(
            (0.0..1.0).contains(&self.background_fraction),
            "chain.background_fraction",
            "must lie in [0, 1)",
        )?;
        ensure(
            self.dark_count_rate >= 0.0 && self.dark_count_rate.is_finite(),
            "chain.dark_count_rate",
            "must be finite and >= 0",
        )?;
        ensure(
            self.irf_sigma >= 0.0 && self.irf_sigma.is_finite(),
            "chain.irf_sigma",
            "must be finite and >= 0",
        )
    }

    /// Successive survival probabilities of an emitted photon: first lens,
    /// setup, any extra elements, then the polarizer.
    pub fn thinning_stages(&self) -> Vec<f64> {
        let mut stages = vec![self.eta_first_lens, self.eta_setup];
        stages.extend_from_slice(&self.extra_transmissions);
        stages.push(self.alpha_mix / 2.0);
        stages
    }

    /// Probability that an emitted photon produces a detector click.
    pub fn detection_probability(&self) -> f64 {
        self.thinning_stages().iter().product()
    }

    /// Width of the timing response of a two-detector delay histogram.
    pub fn coincidence_irf_sigma(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.irf_sigma
    }
}

/// Emitter–cavity coupling used by the β-factor model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityCoupling {
    pub q_factor: f64,
    /// Cavity resonance wavelength (nm).
    pub lambda_0: f64,
    /// Cavity-mode Purcell factor on resonance.
    pub purcell_peak: f64,
    pub eta_cav: f64,
    pub eta_rad: f64,
    /// Decay rate of a reference emitter in bulk (ns⁻¹).
    pub gamma_bulk: f64,
    /// Decay into non-cavity modes in units of `gamma_bulk`.
    pub background_inhibition: f64,
}

impl Default for CavityCoupling {
    // Example values: Q = 300 low-Q mode, peak F_p near 6, inhibited
    // off-resonant decay. λ₀ is illustrative only.
    fn default() -> Self {
        Self {
            q_factor: 300.0,
            lambda_0: 930.0,
            purcell_peak: 5.5,
            eta_cav: 0.45,
            eta_rad: 0.0,
            gamma_bulk: 1.0,
            background_inhibition: 0.5,
        }
    }
}

impl CavityCoupling {
    pub fn validate(&self) -> Result<()> {
        ensure(self.q_factor > 0.0, "cavity.q_factor", "must be > 0")?;
        ensure(self.lambda_0 > 0.0, "cavity.lambda_0", "must be > 0")?;
        ensure(
            self.purcell_peak > 0.0,
            "cavity.purcell_peak",
            "must be > 0",
        )?;
        probability("cavity.eta_cav", self.eta_cav)?;
        probability("cavity.eta_rad", self.eta_rad)?;
        ensure(self.gamma_bulk > 0.0, "cavity.gamma_bulk", "must be > 0")?;
        ensure(
            self.background_inhibition > 0.0,
            "cavity.background_inhibition",
            "must be > 0",
        )
    }

    /// Full width at half maximum of the cavity line (nm).
    pub fn linewidth(&self) -> f64 {
        self.lambda_0 / self.q_factor
    }
}

/// Fine-structure beating mixed into the two-photon coherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beating {
    /// Beat angular frequency (ns⁻¹).
    pub omega: f64,
    /// Weight of the beating term in [0, 1].
    pub weight: f64,
}

impl Beating {
    /// Beating weight implied by the polarization mixing factor: the fraction
    /// `(α − 1)/α` of detected light that comes from the second dipole.
    pub fn from_alpha(omega: f64, alpha: f64) -> Self {
        let weight = if alpha > 1.0 {
            (alpha - 1.0) / alpha
        } else {
            0.0
        };
        Self { omega, weight }
    }

    /// Multiplicative coherence factor `1 − w + w·cos²(Ωτ/2)`.
    pub fn factor(&self, tau: f64) -> f64 {
        let c = (0.5 * self.omega * tau).cos();
        1.0 - self.weight + self.weight * c * c
    }
}

/// Parameters of the HOM coincidence-cluster model. Times in ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomModelParams {
    pub gamma: f64,
    pub gamma_dp: f64,
    /// Counts per bin at the apex of a unit-weight peak.
    pub amplitude: f64,
    pub delta: f64,
    pub rep_period: f64,
    pub irf_sigma: f64,
    #[serde(default)]
    pub beating: Option<Beating>,
}

impl HomModelParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.gamma > 0.0 && self.gamma.is_finite(),
            "gamma",
            "must be finite and > 0",
        )?;
        ensure(self.gamma_dp >= 0.0, "gamma_dp", "must be >= 0")?;
        ensure(self.amplitude > 0.0, "amplitude", "must be > 0")?;
        ensure(self.delta > 0.0, "delta", "must be > 0")?;
        ensure(
            self.rep_period > 4.0 * self.delta,
            "rep_period",
            "must exceed 4·delta so clusters are ordered",
        )?;
        ensure(self.irf_sigma >= 0.0, "irf_sigma", "must be >= 0")
    }

    /// Two-photon coherence `e^{−2γ_dp|τ|}` including optional beating.
    pub fn coherence(&self, tau: f64) -> f64 {
        if self.gamma_dp.is_infinite() {
            return 0.0;
        }
        let base = (-2.0 * self.gamma_dp * tau.abs()).exp();
        match self.beating {
            Some(b) => base * b.factor(tau),
            None => base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_specs_validate() {
        EmitterSpec::default().validate().unwrap();
        ExcitationSchedule::default().validate().unwrap();
        DetectionChain::default().validate().unwrap();
        CavityCoupling::default().validate().unwrap();
    }

    #[test]
    fn emitter_rejects_slow_faster_than_fast() {
        let spec = EmitterSpec {
            gamma_slow: 1.0,
            ..EmitterSpec::default()
        };
        assert!(spec.validate().is_err());
        let spec = EmitterSpec {
            gamma_nrad: 0.7,
            ..EmitterSpec::default()
        };
        assert!(spec.validate().is_err());
        let spec = EmitterSpec {
            xi_x: 0.7,
            xi_x2: 0.4,
            ..EmitterSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn schedule_delay_must_be_below_half_period() {
        assert!(ExcitationSchedule::hom(13.0, 3.04, 1.0).validate().is_ok());
        assert!(ExcitationSchedule::hom(13.0, 6.5, 1.0).validate().is_err());
    }

    #[test]
    fn thinning_product_includes_polarizer() {
        let chain = DetectionChain {
            eta_first_lens: 0.151,
            eta_setup: 0.12,
            alpha_mix: 1.0,
            ..DetectionChain::default()
        };
        assert!((chain.detection_probability() - 0.151 * 0.12 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn beating_weight_vanishes_without_mixing() {
        assert_eq!(Beating::from_alpha(1.0, 1.0).weight, 0.0);
        let b = Beating::from_alpha(2.0, 1.092);
        assert!((b.weight - 0.092 / 1.092).abs() < 1e-12);
        assert!((b.factor(0.0) - 1.0).abs() < 1e-15);
    }
}
