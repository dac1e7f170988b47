use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use crate::error::{ensure, Error, Result};

/// Normalised zero-delay coincidence estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    pub value: f64,
    /// Poisson standard error.
    pub error: f64,
    pub center_counts: u64,
    /// Mean counts of the normalisation peaks.
    pub side_mean: f64,
    pub side_peaks: usize,
}

/// g²(0) from integrated peak areas.
///
/// Counts within `center_window` around zero delay are divided by the mean of
/// equal windows centred on the non-zero multiples of `rep_period` that lie
/// within `±norm_span/2`. Times in ns.
pub fn g2_zero(
    hist: &Histogram,
    rep_period: f64,
    center_window: f64,
    norm_span: f64,
) -> Result<G2Estimate> {
    ensure(rep_period > 0.0, "rep_period", "must be > 0")?;
    ensure(
        center_window > 0.0 && center_window <= rep_period,
        "center_window",
        "must lie in (0, rep_period]",
    )?;
    ensure(norm_span > 0.0, "norm_span", "must be > 0")?;
    let half = center_window * 1e3 / 2.0;
    let window = |c: f64| hist.sum_centres_in(c - half, c + half);
    let lo = (hist.t_min_ps as f64).max(-norm_span * 1e3 / 2.0);
    let hi = (hist.t_max_ps as f64).min(norm_span * 1e3 / 2.0);
    let t = rep_period * 1e3;
    let k_max = (norm_span / rep_period).ceil() as i64 + 1;
    let side: Vec<u64> = (-k_max..=k_max)
        .filter(|&k| k != 0)
        .map(|k| k as f64 * t)
        .filter(|&c| c - half >= lo && c + half <= hi)
        .map(window)
        .collect();
    if side.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} off-zero peaks inside the normalisation span, need at least 3",
            side.len()
        )));
    }
    let side_total: u64 = side.iter().sum();
    if side_total == 0 {
        return Err(Error::InsufficientData(
            "normalisation peaks hold no counts".into(),
        ));
    }
    let side_mean = side_total as f64 / side.len() as f64;
    let center = window(0.0);
    let value = center as f64 / side_mean;
    let sigma_center = (center.max(1) as f64).sqrt();
    let error = ((sigma_center / side_mean).powi(2) + value * value / side_total as f64).sqrt();
    Ok(G2Estimate {
        value,
        error,
        center_counts: center,
        side_mean,
        side_peaks: side.len(),
    })
}

/// Statistics of the repetition-peak areas at long delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakStats {
    /// Peak delays (ps).
    pub peak_centers: Vec<f64>,
    pub areas: Vec<f64>,
    /// Poisson errors of `areas`.
    pub area_errors: Vec<f64>,
    pub mean_area: f64,
    /// Sample standard deviation over the mean.
    pub raw_std_fraction: f64,
    /// Poisson expectation `1/√mean`.
    pub poisson_std_fraction: f64,
    /// Fractional standard deviation with the Poisson part removed in quadrature.
    pub amplitude_std_fraction: f64,
    /// Dispersion-test z-score of the variance excess.
    pub excess_significance: f64,
}

/// Integrates every repetition peak `k·rep_period`, `k ≠ 0`, up to
/// `max_delay` (ms) and reports the spread of the areas.
///
/// Each peak is integrated over a full period centred on it.
pub fn peak_amplitude_scan(hist: &Histogram, rep_period: f64, max_delay: f64) -> Result<PeakStats> {
    ensure(rep_period > 0.0, "rep_period", "must be > 0")?;
    ensure(max_delay > 0.0, "max_delay", "must be > 0")?;
    let t = rep_period * 1e3;
    let reach = (max_delay * 1e9)
        .min(-(hist.t_min_ps as f64))
        .min(hist.t_max_ps as f64);
    let k_max = ((reach - t / 2.0) / t).floor();
    ensure(
        k_max >= 2.0,
        "max_delay",
        "histogram must cover at least two repetition peaks on each side",
    )?;
    let k_max = k_max as i64;
    let mut peak_centers = Vec::new();
    let mut areas = Vec::new();
    for k in (-k_max..=k_max).filter(|&k| k != 0) {
        let c = k as f64 * t;
        peak_centers.push(c);
        areas.push(hist.sum_centres_in(c - t / 2.0, c + t / 2.0) as f64);
    }
    let n = areas.len() as f64;
    let mean_area = areas.iter().sum::<f64>() / n;
    if mean_area <= 0.0 {
        return Err(Error::InsufficientData(
            "repetition peaks hold no counts".into(),
        ));
    }
    let var = areas.iter().map(|a| (a - mean_area).powi(2)).sum::<f64>() / (n - 1.0);
    let area_errors = areas.iter().map(|a| a.sqrt()).collect();
    Ok(PeakStats {
        peak_centers,
        areas,
        area_errors,
        mean_area,
        raw_std_fraction: var.sqrt() / mean_area,
        poisson_std_fraction: 1.0 / mean_area.sqrt(),
        amplitude_std_fraction: (var - mean_area).max(0.0).sqrt() / mean_area,
        excess_significance: (var / mean_area - 1.0) / (2.0 / (n - 1.0)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Histogram with `area` counts in the bin at every multiple of the period.
    fn comb(area: impl Fn(i64) -> u64, centre: u64) -> Histogram {
        let mut h = Histogram::zeros(100, -200_000, 200_000).unwrap();
        for k in -15i64..=15 {
            let bin = h.bin_of(k * 12_500 + 10).unwrap();
            h.counts[bin] = if k == 0 { centre } else { area(k) };
        }
        h.total_pairs = h.counts.iter().sum();
        h
    }

    #[test]
    fn empty_centre_gives_zero() {
        let g = g2_zero(&comb(|_| 400, 0), 12.5, 2.0, 300.0).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(g.error > 0.0);
    }

    #[test]
    fn ratio_and_error() {
        let g = g2_zero(&comb(|_| 400, 100), 12.5, 2.0, 300.0).unwrap();
        assert!((g.value - 0.25).abs() < 1e-12);
        assert_eq!(g.side_peaks, 22);
        let expect = ((10.0 / 400.0f64).powi(2) + 0.0625 / (22.0 * 400.0)).sqrt();
        assert!((g.error - expect).abs() < 1e-12);
    }

    #[test]
    fn too_few_side_peaks() {
        assert!(matches!(
            g2_zero(&comb(|_| 400, 0), 12.5, 2.0, 30.0),
            Err(Error::InsufficientData(_))
        ));
        let empty = Histogram::zeros(100, -200_000, 200_000).unwrap();
        assert!(g2_zero(&empty, 12.5, 2.0, 300.0).is_err());
    }

    #[test]
    fn flat_peaks_have_no_excess() {
        let s = peak_amplitude_scan(&comb(|_| 10_000, 0), 12.5, 1.0).unwrap();
        assert_eq!(s.areas.len(), 30);
        assert_eq!(s.raw_std_fraction, 0.0);
        assert_eq!(s.amplitude_std_fraction, 0.0);
        assert!(s.excess_significance < 0.0);
    }

    #[test]
    fn alternating_peaks_show_excess() {
        let s = peak_amplitude_scan(
            &comb(|k| if k % 2 == 0 { 11_000 } else { 9_000 }, 0),
            12.5,
            1.0,
        )
        .unwrap();
        assert!((s.amplitude_std_fraction - 0.1).abs() < 0.01);
        assert!(s.excess_significance > 3.0);
    }
}
