use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::Result;

/// Two-state on/off trajectory over a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Telegraph {
    initially_on: bool,
    /// Switching times (ns), increasing.
    switches: Vec<f64>,
}

impl Telegraph {
    /// Always-on trajectory.
    pub fn always_on() -> Self {
        Self {
            initially_on: true,
            switches: Vec::new(),
        }
    }

    /// Samples a stationary trajectory on `[0, horizon]`. Rates are in µs⁻¹.
    pub fn sample<R: Rng + ?Sized>(
        off_rate: f64,
        on_rate: f64,
        horizon_ns: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if off_rate <= 0.0 {
            return Ok(Self::always_on());
        }
        let to_off =
            Exp::new(off_rate * 1e-3).map_err(|e| crate::Error::invalid("blink_off_rate", e))?;
        let to_on =
            Exp::new(on_rate * 1e-3).map_err(|e| crate::Error::invalid("blink_on_rate", e))?;
        let initially_on = rng.gen::<f64>() < on_rate / (on_rate + off_rate);
        let mut on = initially_on;
        let mut t = 0.0;
        let mut switches = Vec::new();
        loop {
            t += if on {
                to_off.sample(rng)
            } else {
                to_on.sample(rng)
            };
            if t > horizon_ns {
                break;
            }
            switches.push(t);
            on = !on;
        }
        Ok(Self {
            initially_on,
            switches,
        })
    }

    pub fn is_on(&self, t_ns: f64) -> bool {
        let flips = self.switches.partition_point(|&s| s <= t_ns);
        self.initially_on ^ (flips % 2 == 1)
    }

    pub fn switch_count(&self) -> usize {
        self.switches.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stationary_on_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tel = Telegraph::sample(2.0, 6.0, 1e8, &mut rng).unwrap();
        let n = 200_000;
        let on = (0..n).filter(|i| tel.is_on(*i as f64 * 500.0)).count();
        let frac = on as f64 / n as f64;
        assert!((frac - 0.75).abs() < 0.01, "{frac}");
        assert!(tel.switch_count() > 10_000);
    }

    #[test]
    fn disabled_is_always_on() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tel = Telegraph::sample(0.0, 0.0, 1e6, &mut rng).unwrap();
        assert!((0..100).all(|i| tel.is_on(i as f64 * 1e4)));
    }
}
