use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, Normal, Poisson};
use rayon::prelude::*;

use super::blinking::Telegraph;
use super::config::{Mode, SimConfig};
use super::routing::{route_hbt, route_hom, Detection, HomRouting, Photon, PhotonKind};
use super::stream::{TimeTag, TimeTagStream};
use crate::error::{Error, Result};
use crate::model::{BackgroundStatistics, Beating};

/// Periods simulated per RNG stream.
pub const BLOCK_PERIODS: u64 = 1 << 14;

/// RNG stream reserved for the blinking trajectory.
const TELEGRAPH_STREAM: u64 = u64::MAX;

struct Plan<'a> {
    cfg: &'a SimConfig,
    telegraph: Telegraph,
    lead_in: f64,
    pulse_offsets: Vec<f64>,
    p_exc: f64,
    p_x: f64,
    p_x2: f64,
    fast: Exp<f64>,
    slow: Option<Exp<f64>>,
    stages: Vec<f64>,
    background: Option<Background>,
    dark_per_ns: f64,
    jitter: Option<Normal<f64>>,
    hom: Option<HomRouting>,
}

enum Background {
    Poissonian(Poisson<f64>),
    Chaotic(Geometric),
}

impl Background {
    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Background::Poissonian(d) => d.sample(rng) as u64,
            Background::Chaotic(d) => d.sample(rng),
        }
    }
}

impl<'a> Plan<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        let e = &cfg.emitter;
        let s = &cfg.schedule;
        let c = &cfg.chain;
        let rep = s.rep_period;
        let lead_in = cfg.pulse_offset();
        let horizon = rep * cfg.n_periods as f64 + 2.0 * lead_in;
        if horizon.is_nan() || horizon * 1e3 >= 9.0e18 {
            return Err(Error::TimestampOverflow(format!(
                "{} periods of {rep} ns exceed the 64-bit picosecond range",
                cfg.n_periods
            )));
        }
        let mut trng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        trng.set_stream(TELEGRAPH_STREAM);
        let telegraph = Telegraph::sample(e.blink_off_rate, e.blink_on_rate, horizon, &mut trng)?;

        let pulse_offsets = if s.pulses_per_period == 2 {
            vec![0.0, s.intra_delay]
        } else {
            vec![0.0]
        };
        let eta_qe = e.eta_qe();
        let p_exc = s.excitation_probability();
        let p_x = e.xi_x * eta_qe;
        let p_x2 = e.xi_x2 * eta_qe;
        let fast =
            Exp::new(e.gamma_fast).map_err(|err| Error::invalid("emitter.gamma_fast", err))?;
        let slow = if e.slow_fraction > 0.0 {
            Some(Exp::new(e.gamma_slow).map_err(|err| Error::invalid("emitter.gamma_slow", err))?)
        } else {
            None
        };
        let stages = c.thinning_stages();
        let detected_signal = p_exc * (p_x + p_x2) * e.on_fraction() * c.detection_probability();
        let b = c.background_fraction;
        let mu = if b > 0.0 {
            b / (1.0 - b) * detected_signal
        } else {
            0.0
        };
        let background = if mu > 0.0 {
            Some(match c.background_statistics {
                BackgroundStatistics::Poissonian => Background::Poissonian(
                    Poisson::new(mu)
                        .map_err(|err| Error::invalid("chain.background_fraction", err))?,
                ),
                BackgroundStatistics::Chaotic => Background::Chaotic(
                    Geometric::new(1.0 / (1.0 + mu))
                        .map_err(|err| Error::invalid("chain.background_fraction", err))?,
                ),
            })
        } else {
            None
        };
        let jitter = if c.irf_sigma > 0.0 {
            Some(
                Normal::new(0.0, c.irf_sigma)
                    .map_err(|err| Error::invalid("chain.irf_sigma", err))?,
            )
        } else {
            None
        };
        let hom = (cfg.mode == Mode::Hom).then(|| HomRouting {
            delta: s.intra_delay,
            gamma_dp: e.gamma_dp,
            beating: e.fss_beat.map(|w| Beating::from_alpha(w, c.alpha_mix)),
            sampler: cfg.sampler,
        });
        Ok(Self {
            cfg,
            telegraph,
            lead_in,
            pulse_offsets,
            p_exc,
            p_x,
            p_x2,
            fast,
            slow,
            stages,
            background,
            dark_per_ns: c.dark_count_rate * 1e-9,
            jitter,
            hom,
        })
    }

    fn horizon_ps(&self) -> u64 {
        let ns = self.cfg.schedule.rep_period * self.cfg.n_periods as f64 + 2.0 * self.lead_in;
        (ns * 1e3).round() as u64
    }

    fn survives(&self, rng: &mut ChaCha8Rng) -> bool {
        self.stages.iter().all(|&p| rng.gen::<f64>() < p)
    }

    fn emitter_photons(
        &self,
        t_pulse: f64,
        pulse: u8,
        rng: &mut ChaCha8Rng,
        out: &mut Vec<Photon>,
    ) {
        if !self.telegraph.is_on(t_pulse) || rng.gen::<f64>() >= self.p_exc {
            return;
        }
        let u: f64 = rng.gen();
        let (kind, delay) = if u < self.p_x {
            match &self.slow {
                Some(slow) if rng.gen::<f64>() < self.cfg.emitter.slow_fraction => {
                    (PhotonKind::SlowExciton, slow.sample(rng))
                }
                _ => (PhotonKind::Exciton, self.fast.sample(rng)),
            }
        } else if u < self.p_x + self.p_x2 {
            (PhotonKind::ChargedExciton, self.fast.sample(rng))
        } else {
            return;
        };
        if self.survives(rng) {
            out.push(Photon {
                time: t_pulse + delay,
                emission_delay: delay,
                pulse,
                kind,
            });
        }
    }

    fn background_photons(
        &self,
        t_pulse: f64,
        pulse: u8,
        rng: &mut ChaCha8Rng,
        out: &mut Vec<Photon>,
    ) {
        let Some(bg) = &self.background else { return };
        for _ in 0..bg.sample(rng) {
            let delay = self.fast.sample(rng);
            out.push(Photon {
                time: t_pulse + delay,
                emission_delay: delay,
                pulse,
                kind: PhotonKind::Background,
            });
        }
    }

    fn push(&self, d: Detection, rng: &mut ChaCha8Rng, out: &mut Vec<TimeTag>) -> Result<()> {
        let t = match &self.jitter {
            Some(n) => d.time + n.sample(rng),
            None => d.time,
        };
        let ps = (t * 1e3).round();
        if !(0.0..9.0e18).contains(&ps) {
            return Err(Error::TimestampOverflow(format!(
                "timestamp {t} ns out of range"
            )));
        }
        out.push(TimeTag::new(d.channel, ps as u64));
        Ok(())
    }

    fn run_block(&self, block: u64) -> Result<Vec<TimeTag>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.rng_seed);
        rng.set_stream(block);
        let rep = self.cfg.schedule.rep_period;
        let first = block * BLOCK_PERIODS;
        let last = (first + BLOCK_PERIODS).min(self.cfg.n_periods);
        let mut out = Vec::new();
        let mut photons = Vec::with_capacity(8);
        for n in first..last {
            photons.clear();
            let t0 = self.lead_in + n as f64 * rep;
            for (k, &off) in self.pulse_offsets.iter().enumerate() {
                self.emitter_photons(t0 + off, k as u8, &mut rng, &mut photons);
                self.background_photons(t0 + off, k as u8, &mut rng, &mut photons);
            }
            if photons.is_empty() {
                continue;
            }
            let detections = match &self.hom {
                Some(h) => route_hom(&photons, h, &mut rng),
                None => route_hbt(&photons, &mut rng),
            };
            for d in detections {
                self.push(d, &mut rng, &mut out)?;
            }
        }
        if self.dark_per_ns > 0.0 {
            let start = if block == 0 {
                0.0
            } else {
                self.lead_in + first as f64 * rep
            };
            let end = if last == self.cfg.n_periods {
                self.horizon_ps() as f64 * 1e-3
            } else {
                self.lead_in + last as f64 * rep
            };
            let gap = Exp::new(self.dark_per_ns)
                .map_err(|e| Error::invalid("chain.dark_count_rate", e))?;
            for channel in 0..2u8 {
                let mut t = start + gap.sample(&mut rng);
                while t < end {
                    out.push(TimeTag::new(channel, (t * 1e3).round() as u64));
                    t += gap.sample(&mut rng);
                }
            }
        }
        Ok(out)
    }
}

/// Runs the Monte Carlo and returns the time-ordered detector stream.
///
/// Output depends only on `config` (including its seed), not on the number of
/// worker threads.
pub fn simulate(config: &SimConfig) -> Result<TimeTagStream> {
    config.validate()?;
    let plan = Plan::new(config)?;
    let blocks = config.n_periods.div_ceil(BLOCK_PERIODS);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| plan.run_block(b))
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<TimeTag> = parts.into_iter().flatten().collect();
    records.par_sort_unstable();
    let stream = TimeTagStream::new(records, plan.horizon_ps())?;
    Ok(stream.with_digest(config.digest()))
}
