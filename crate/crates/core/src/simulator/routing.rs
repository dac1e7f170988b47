use rand::Rng;
use rand_distr::StandardNormal;

use super::config::InterferenceSampler;
use crate::model::Beating;

/// Origin of a photon reaching the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonKind {
    /// Neutral exciton, fast decay component.
    Exciton,
    /// Neutral exciton, slow decay component.
    SlowExciton,
    /// Charged exciton.
    ChargedExciton,
    /// Uncorrelated background line.
    Background,
}

/// A photon entering the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    /// Absolute time (ns).
    pub time: f64,
    /// Delay after its excitation pulse (ns).
    pub emission_delay: f64,
    /// Pulse index within the period.
    pub pulse: u8,
    pub kind: PhotonKind,
}

/// A photon leaving the interferometer towards a detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub channel: u8,
    /// Time before detector jitter (ns).
    pub time: f64,
}

/// Sends every photon to either output with probability 1/2.
pub fn route_hbt<R: Rng + ?Sized>(photons: &[Photon], rng: &mut R) -> Vec<Detection> {
    photons
        .iter()
        .map(|p| Detection {
            channel: u8::from(rng.gen::<bool>()),
            time: p.time,
        })
        .collect()
}

/// Interference settings of the HOM router.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomRouting {
    /// Extra delay of the long arm (ns).
    pub delta: f64,
    pub gamma_dp: f64,
    pub beating: Option<Beating>,
    pub sampler: InterferenceSampler,
}

impl HomRouting {
    fn coherence(&self, tau: f64) -> f64 {
        self.beating.map_or(1.0, |b| b.factor(tau))
    }

    /// Probability that an interfering pair exits on different ports.
    fn cross_probability<R: Rng + ?Sized>(&self, tau: f64, rng: &mut R) -> f64 {
        if self.gamma_dp.is_infinite() {
            return 0.5;
        }
        let c = self.coherence(tau);
        match self.sampler {
            InterferenceSampler::Bernoulli => {
                0.5 * (1.0 - c * (-2.0 * self.gamma_dp * tau.abs()).exp())
            }
            InterferenceSampler::PhaseDiffusion => {
                let sd = (2.0 * self.gamma_dp * tau.abs()).sqrt();
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                0.5 * (1.0 - c * (sd * (a - b)).cos())
            }
        }
    }
}

/// Routes the photons of one period through the unbalanced interferometer.
///
/// Every photon takes the short or long arm with probability 1/2. An exciton
/// photon from the first pulse on the long arm and one from the second pulse
/// on the short arm meet at the output beamsplitter and leave on different
/// ports with probability `½(1 − e^{−2γ_dp|τ|})`, `τ` being the difference
/// of their emission delays. All other photons pick a port at random.
pub fn route_hom<R: Rng + ?Sized>(
    photons: &[Photon],
    routing: &HomRouting,
    rng: &mut R,
) -> Vec<Detection> {
    let long: Vec<bool> = photons.iter().map(|_| rng.gen::<bool>()).collect();
    let candidate = |pulse: u8, want_long: bool| {
        photons
            .iter()
            .zip(&long)
            .position(|(p, &l)| p.kind == PhotonKind::Exciton && p.pulse == pulse && l == want_long)
    };
    let pair = match (candidate(0, true), candidate(1, false)) {
        (Some(e), Some(l)) => Some((e, l)),
        _ => None,
    };
    let mut channels: Vec<u8> = photons
        .iter()
        .map(|_| u8::from(rng.gen::<bool>()))
        .collect();
    if let Some((e, l)) = pair {
        let tau = photons[l].emission_delay - photons[e].emission_delay;
        let cross = rng.gen::<f64>() < routing.cross_probability(tau, rng);
        let first = u8::from(rng.gen::<bool>());
        channels[e] = first;
        channels[l] = if cross { 1 - first } else { first };
    }
    photons
        .iter()
        .zip(long)
        .zip(channels)
        .map(|((p, l), channel)| Detection {
            channel,
            time: if l { p.time + routing.delta } else { p.time },
        })
        .collect()
}
