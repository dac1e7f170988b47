use crate::correlator::Histogram;
use crate::error::{ensure, Result};
use crate::model::{convolve_with_irf, SampledCurve};

/// Sub-grid used to evaluate a model on histogram bins: point samples on
/// cells of width ≤ σ/4, Gaussian convolution, then averaging into bins.
#[derive(Debug, Clone)]
pub(crate) struct BinGrid {
    pub first_bin: usize,
    pub n_bins: usize,
    pub sub: usize,
    pub margin: usize,
    /// Cell width (ns).
    pub step: f64,
    /// Left edge of the first cell (ns).
    pub t_lo: f64,
    pub sigma: f64,
}

/// Cell width used when no IRF smoothing is applied (ns).
const UNSMOOTHED_STEP: f64 = 0.005;

impl BinGrid {
    pub fn new(hist: &Histogram, first_bin: usize, n_bins: usize, sigma: f64) -> Result<Self> {
        ensure(
            sigma >= 0.0 && sigma.is_finite(),
            "irf_sigma",
            "must be finite and >= 0",
        )?;
        ensure(
            n_bins > 0 && first_bin + n_bins <= hist.len(),
            "histogram",
            "fit range outside the histogram",
        )?;
        let bw = hist.bin_width_ns();
        let max_step = if sigma > 0.0 {
            sigma / 4.0
        } else {
            UNSMOOTHED_STEP
        };
        let sub = ((bw / max_step).ceil() as usize).max(1);
        let step = bw / sub as f64;
        let margin = if sigma > 0.0 {
            (10.0 * sigma / step).ceil() as usize
        } else {
            0
        };
        let bin_lo = (hist.t_min_ps as f64 + (first_bin as f64) * hist.bin_width_ps as f64) * 1e-3;
        Ok(Self {
            first_bin,
            n_bins,
            sub,
            margin,
            step,
            t_lo: bin_lo - margin as f64 * step,
            sigma,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_bins * self.sub + 2 * self.margin
    }

    /// Cell centres (ns).
    pub fn cell_times(&self) -> Vec<f64> {
        (0..self.n_cells())
            .map(|i| self.t_lo + (i as f64 + 0.5) * self.step)
            .collect()
    }

    /// Convolves cell values with the IRF and averages them into bins.
    pub fn project(&self, cells: Vec<f64>) -> Result<Vec<f64>> {
        let curve = SampledCurve::new(self.t_lo + 0.5 * self.step, self.step, cells)?;
        let smooth = convolve_with_irf(&curve, self.sigma)?;
        let inv = 1.0 / self.sub as f64;
        Ok((0..self.n_bins)
            .map(|b| {
                let s = self.margin + b * self.sub;
                smooth.values[s..s + self.sub].iter().sum::<f64>() * inv
            })
            .collect())
    }
}
