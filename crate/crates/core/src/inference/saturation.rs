use nalgebra::DMatrix;

use super::lm::{levenberg_marquardt, LmConfig};
use super::report::{FitReport, Weighting};
use crate::error::{ensure, Error, Result};
use crate::model::saturation_curve;

/// One point of a power series: excitation power, detected counts and the
/// counts' standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationPoint {
    pub power: f64,
    pub counts: f64,
    pub error: f64,
}

impl From<(f64, f64, f64)> for SaturationPoint {
    fn from((power, counts, error): (f64, f64, f64)) -> Self {
        Self {
            power,
            counts,
            error,
        }
    }
}

/// Weighted fit of `C_sat·(1 − exp(−P/P_sat))`; parameters `c_sat`, `p_sat`.
pub fn fit_saturation(points: &[SaturationPoint]) -> Result<FitReport> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} points, saturation fit needs at least 4",
            points.len()
        )));
    }
    for p in points {
        ensure(p.power >= 0.0, "power", "must be >= 0")?;
        ensure(p.error > 0.0, "error", "every point needs a positive error")?;
    }
    let c_max = points.iter().map(|p| p.counts).fold(f64::MIN, f64::max);
    ensure(c_max > 0.0, "counts", "all counts are zero")?;
    // initial P_sat: power where the counts first reach 1 − 1/e of the maximum
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.power.total_cmp(&b.power));
    let target = c_max * (1.0 - (-1.0f64).exp());
    let p0 = sorted
        .iter()
        .find(|p| p.counts >= target)
        .map(|p| p.power)
        .filter(|&p| p > 0.0)
        .unwrap_or_else(|| sorted.last().map_or(1.0, |p| p.power.max(1e-12)));
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        points
            .iter()
            .map(|p| Ok((saturation_curve(p.power, x[1], x[0])? - p.counts) / p.error))
            .collect()
    };
    let fit = levenberg_marquardt(
        residuals,
        &[c_max, p0],
        &[0.0, 1e-12 * p0],
        &[f64::INFINITY, f64::INFINITY],
        &LmConfig::default(),
        "saturation",
    )?;
    let cov: DMatrix<f64> = fit.covariance;
    let report = FitReport::new(
        "saturation",
        &["c_sat", "p_sat"],
        &fit.params,
        &cov,
        fit.chi2,
        points.len(),
        Weighting::Supplied,
    );
    Ok(report)
}
