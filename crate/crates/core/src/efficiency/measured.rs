use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// A measured value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub error: f64,
}

impl Measured {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn relative_error(&self) -> f64 {
        self.error / self.value.abs()
    }
}

impl From<f64> for Measured {
    fn from(value: f64) -> Self {
        Self::exact(value)
    }
}

/// Closed interval of measured endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lower: T,
    pub upper: T,
}

/// Error propagation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// First-order (linearised) propagation.
    #[default]
    Linear,
    /// Resampling inputs from independent Gaussians.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Evaluates `f` at the central values and propagates the input errors.
///
/// Inputs are treated as independent.
pub fn propagate<F>(f: F, inputs: &[Measured], method: Propagation) -> Result<Measured>
where
    F: Fn(&[f64]) -> f64,
{
    let x: Vec<f64> = inputs.iter().map(|m| m.value).collect();
    let value = f(&x);
    ensure(
        value.is_finite(),
        "inputs",
        "function is not finite at the central values",
    )?;
    let error = match method {
        Propagation::Linear => {
            let mut var = 0.0;
            let mut xp = x.clone();
            for (k, m) in inputs.iter().enumerate() {
                if m.error == 0.0 {
                    continue;
                }
                let h = 1e-6 * x[k].abs().max(m.error);
                xp[k] = x[k] + h;
                let up = f(&xp);
                xp[k] = x[k] - h;
                let down = f(&xp);
                xp[k] = x[k];
                let d = (up - down) / (2.0 * h);
                var += (d * m.error).powi(2);
            }
            var.sqrt()
        }
        Propagation::MonteCarlo { samples, seed } => {
            ensure(samples >= 2, "samples", "need at least 2 samples")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dists: Vec<Option<Normal<f64>>> = inputs
                .iter()
                .map(|m| (m.error > 0.0).then(|| Normal::new(m.value, m.error).expect("finite sd")))
                .collect();
            let mut xs = x.clone();
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..samples {
                for (k, d) in dists.iter().enumerate() {
                    if let Some(d) = d {
                        xs[k] = d.sample(&mut rng);
                    }
                }
                let y = f(&xs);
                sum += y;
                sum2 += y * y;
            }
            let n = samples as f64;
            let mean = sum / n;
            ((sum2 / n - mean * mean) * n / (n - 1.0)).max(0.0).sqrt()
        }
    };
    Ok(Measured::new(value, error))
}
