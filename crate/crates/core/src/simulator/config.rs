use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ensure, Result};
use crate::model::{DetectionChain, EmitterSpec, ExcitationSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Single beamsplitter, two detectors.
    #[default]
    Hbt,
    /// Pulse pairs through an unbalanced Mach–Zehnder interferometer.
    Hom,
}

/// How the coalescence of an interfering photon pair is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceSampler {
    /// Bernoulli draw with the ensemble-averaged coherence.
    #[default]
    Bernoulli,
    /// Per-photon Wiener phases with variance rate `2γ_dp`.
    PhaseDiffusion,
}

/// Complete input of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub emitter: EmitterSpec,
    #[serde(default)]
    pub schedule: ExcitationSchedule,
    #[serde(default)]
    pub chain: DetectionChain,
    #[serde(default)]
    pub mode: Mode,
    pub n_periods: u64,
    pub rng_seed: u64,
    #[serde(default)]
    pub sampler: InterferenceSampler,
}

impl SimConfig {
    pub fn new(
        emitter: EmitterSpec,
        schedule: ExcitationSchedule,
        chain: DetectionChain,
        mode: Mode,
        n_periods: u64,
        rng_seed: u64,
    ) -> Self {
        Self {
            emitter,
            schedule,
            chain,
            mode,
            n_periods,
            rng_seed,
            sampler: InterferenceSampler::Bernoulli,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.emitter.validate()?;
        self.schedule.validate()?;
        self.chain.validate()?;
        ensure(self.n_periods >= 1, "simulation.n_periods", "must be >= 1")?;
        if self.mode == Mode::Hom {
            ensure(
                self.schedule.pulses_per_period == 2,
                "schedule.pulses_per_period",
                "HOM mode needs 2 pulses per period",
            )?;
            ensure(
                self.schedule.intra_delay > 0.0,
                "schedule.intra_delay",
                "HOM mode needs a positive pulse separation",
            )?;
        }
        Ok(())
    }

    /// Time (ns) of the first excitation pulse on the stream clock; later
    /// periods start at multiples of `rep_period` after it.
    pub fn pulse_offset(&self) -> f64 {
        self.schedule.rep_period + 20.0 * self.chain.irf_sigma
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimConfig {
        SimConfig::new(
            EmitterSpec::default(),
            ExcitationSchedule::hom(13.0, 3.04, 5.0),
            DetectionChain::default(),
            Mode::Hom,
            10,
            1,
        )
    }

    #[test]
    fn hom_requires_two_pulses() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.schedule.pulses_per_period = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_periods_rejected() {
        let mut c = base();
        c.n_periods = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_tracks_seed() {
        let a = base();
        let mut b = base();
        assert_eq!(a.digest(), b.digest());
        b.rng_seed = 2;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
