use serde::{Deserialize, Serialize};

use super::grid::BinGrid;
use super::lm::{levenberg_marquardt, LmConfig};
use super::report::{Estimate, FitReport, Weighting};
use crate::correlator::Histogram;
use crate::error::{ensure, Error, Result};
use crate::simulator::TimeTagStream;

/// Folds all clicks into one repetition period.
///
/// `pulse_offset` (ns) is the time of any excitation pulse on the stream's
/// clock. The histogram covers `[0, n·bin_width)` with `n = ⌊T/bin_width⌋`;
/// clicks in the remainder of the period are dropped.
pub fn phase_histogram(
    stream: &TimeTagStream,
    rep_period: f64,
    pulse_offset: f64,
    bin_width_ps: u64,
) -> Result<Histogram> {
    ensure(rep_period > 0.0, "rep_period", "must be > 0")?;
    let period_ps = rep_period * 1e3;
    let n = (period_ps / bin_width_ps as f64).floor() as i64;
    ensure(n >= 2, "bin_width_ps", "must be below half the period")?;
    let mut h = Histogram::zeros(bin_width_ps, 0, n * bin_width_ps as i64)?;
    let off = pulse_offset * 1e3;
    for r in stream.records() {
        let phase = (r.timestamp_ps as f64 - off).rem_euclid(period_ps);
        if let Some(k) = h.bin_of(phase.floor() as i64) {
            h.counts[k] += 1;
            h.total_pairs += 1;
        }
    }
    Ok(h)
}

/// Settings of the bi-exponential lifetime fit. Times in ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeOptions {
    pub rep_period: f64,
    pub irf_sigma: f64,
    pub weighting: Weighting,
}

impl LifetimeOptions {
    pub fn new(rep_period: f64, irf_sigma: f64) -> Self {
        Self {
            rep_period,
            irf_sigma,
            weighting: Weighting::Poisson,
        }
    }
}

/// Mean over `[lo, lo + h)` of the periodic bi-exponential decay plus
/// background. Cells straddling a pulse are split at the pulse, so the
/// jump lands at its true phase whatever the cell grid.
fn decay_cell(x: &[f64], lo: f64, h: f64, period: f64) -> f64 {
    // ∫ a·e^{−γp}/(1 − e^{−γT}) dp over phase [p0, p1)
    let part = |a: f64, g: f64, p0: f64, p1: f64| {
        a * ((-g * p0).exp() - (-g * p1).exp()) / (g * -(-g * period).exp_m1())
    };
    let both = |p0: f64, p1: f64| part(x[0], x[1], p0, p1) + part(x[2], x[3], p0, p1);
    let p0 = lo.rem_euclid(period);
    let area = if p0 + h <= period {
        both(p0, p0 + h)
    } else {
        both(p0, period) + both(0.0, p0 + h - period)
    };
    area / h + x[4]
}

/// Fits `A_fast·e^{−γ_fast t} + A_slow·e^{−γ_slow t} + B`, repeated every
/// period and convolved with the IRF, to a phase histogram.
///
/// Amplitudes are counts per bin. Derived: intensity ratio
/// `I_slow/I_fast = (A_slow/γ_slow)/(A_fast/γ_fast)` and the mixing bound
/// `α ≤ 1 + I_slow/I_fast`.
pub fn fit_lifetime(phase: &Histogram, opts: &LifetimeOptions) -> Result<FitReport> {
    ensure(
        phase.t_min_ps == 0,
        "phase",
        "histogram must start at zero phase",
    )?;
    ensure(
        phase.t_max_ps as f64 <= opts.rep_period * 1e3 + 1e-6,
        "phase",
        "histogram longer than the period",
    )?;
    let counts: Vec<f64> = phase.counts.iter().map(|&c| c as f64).collect();
    let n = counts.len();
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InsufficientData(
            "phase histogram holds no counts".into(),
        ));
    }
    let grid = BinGrid::new(phase, 0, n, opts.irf_sigma)?;
    let cells = grid.cell_times();
    let (period, h) = (opts.rep_period, grid.step);
    let model = |x: &[f64]| -> Result<Vec<f64>> {
        grid.project(
            cells
                .iter()
                .map(|&t| decay_cell(x, t - 0.5 * h, h, period))
                .collect(),
        )
    };

    let mut sorted = counts.clone();
    sorted.sort_by(f64::total_cmp);
    let bg0 = sorted[n / 10];
    let (peak_bin, peak) =
        counts.iter().enumerate().fold(
            (0, f64::MIN),
            |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc },
        );
    let bw = phase.bin_width_ns();
    let target = bg0 + (peak - bg0) / std::f64::consts::E;
    let fall = counts[peak_bin..]
        .iter()
        .position(|&c| c < target)
        .unwrap_or(n / 4)
        .max(1);
    let gf0 = 1.0 / (fall as f64 * bw);
    let x0 = [
        (peak - bg0).max(1.0),
        gf0,
        0.05 * (peak - bg0).max(1.0),
        gf0 / 3.0,
        bg0,
    ];
    let w = opts.weighting;
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let m = model(x)?;
        Ok(m.iter()
            .zip(&counts)
            .map(|(m, c)| w.residual(*c, *m))
            .collect())
    };
    let inf = f64::INFINITY;
    let fit = levenberg_marquardt(
        residuals,
        &x0,
        &[0.0, 1e-6, 0.0, 1e-6, 0.0],
        &[inf, inf, inf, inf, inf],
        &LmConfig::default(),
        "lifetime",
    )?;
    let mut x = fit.params.clone();
    let mut cov = fit.covariance.clone();
    // label the faster component as fast
    if x[3] > x[1] {
        x.swap(0, 2);
        x.swap(1, 3);
        cov.swap_rows(0, 2);
        cov.swap_rows(1, 3);
        cov.swap_columns(0, 2);
        cov.swap_columns(1, 3);
    }
    let mut report = FitReport::new(
        "lifetime",
        &["a_fast", "gamma_fast", "a_slow", "gamma_slow", "background"],
        &x,
        &cov,
        fit.chi2,
        n,
        w,
    );
    report.fixed.insert("rep_period".into(), opts.rep_period);
    report.fixed.insert("irf_sigma".into(), opts.irf_sigma);
    // ratio r = (a_s γ_f)/(a_f γ_s), gradient for linear propagation
    let r = x[2] * x[1] / (x[0] * x[3]);
    let grad = [-r / x[0], r / x[1], r / x[2], -r / x[3]];
    let mut var = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            var += grad[a] * grad[b] * cov[(a, b)];
        }
    }
    let ratio = Estimate::new(r, var.max(0.0).sqrt());
    report.derived.insert("i_slow_over_i_fast".into(), ratio);
    report
        .derived
        .insert("alpha_upper".into(), Estimate::new(1.0 + r, ratio.error));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_noiseless_decay() {
        let period = 13.0;
        let mut h = Histogram::zeros(50, 0, 13_000).unwrap();
        let truth = [800.0, 0.62, 30.0, 0.2, 5.0];
        let grid = BinGrid::new(&h, 0, h.len(), 0.1).unwrap();
        let cells = grid.cell_times();
        let m = grid
            .project(
                cells
                    .iter()
                    .map(|&t| decay_cell(&truth, t - 0.5 * grid.step, grid.step, period))
                    .collect(),
            )
            .unwrap();
        h.counts = m.iter().map(|v| (v * 1000.0).round() as u64).collect();
        let r = fit_lifetime(&h, &LifetimeOptions::new(period, 0.1)).unwrap();
        assert!((r.param("gamma_fast").unwrap().value - 0.62).abs() < 1e-3);
        assert!((r.param("gamma_slow").unwrap().value - 0.2).abs() < 2e-3);
        let expect = (30.0 / 0.2) / (800.0 / 0.62);
        assert!((r.derived("i_slow_over_i_fast").unwrap().value - expect).abs() < 2e-3);
    }

    #[test]
    fn cell_straddling_a_pulse_matches_fine_sum() {
        let (period, x) = (1e3 / 76.0, [800.0, 0.62, 30.0, 0.2, 5.0]);
        let point = |t: f64| {
            let p = t.rem_euclid(period);
            let term = |a: f64, g: f64| a * (-g * p).exp() / -(-g * period).exp_m1();
            term(x[0], x[1]) + term(x[2], x[3]) + x[4]
        };
        for lo in [period - 0.01, -0.02, 3.0] {
            let n = 100_000;
            let fine = (0..n)
                .map(|j| point(lo + 0.025 * (j as f64 + 0.5) / n as f64))
                .sum::<f64>()
                / n as f64;
            assert!(
                (decay_cell(&x, lo, 0.025, period) / fine - 1.0).abs() < 1e-6,
                "{lo}"
            );
        }
    }
}
