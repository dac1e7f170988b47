use std::collections::BTreeMap;
use std::io::{BufWriter, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::grid::BinGrid;
use super::lm::{jacobian, levenberg_marquardt, pseudo_inverse, LmConfig};
use super::report::{Estimate, FitReport, StageReport, Weighting};
use crate::correlator::Histogram;
use crate::error::{ensure, Error, Result};
use crate::model::{
    coherence_times, hom_model, hom_peak_components, visibility, Beating, HomModelParams,
};
use crate::HBAR_UEV_NS;

/// Fixed inputs and settings of the staged HOM fit. Times in ns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomFitOptions {
    /// Radiative decay rate from an independent lifetime measurement.
    pub gamma: f64,
    pub delta: f64,
    pub rep_period: f64,
    /// Width of the Gaussian timing response of the delay histogram.
    pub irf_sigma: f64,
    /// Side clusters included on each side of zero delay.
    pub clusters: usize,
    /// Half-width of the region around zero left out in stage 2; `None` means δ/2.
    pub exclusion_half_width: Option<f64>,
    pub weighting: Weighting,
    pub beating: Option<Beating>,
    /// Number of stage 2/3 passes.
    pub passes: usize,
}

impl HomFitOptions {
    pub fn new(gamma: f64, delta: f64, rep_period: f64, irf_sigma: f64) -> Self {
        Self {
            gamma,
            delta,
            rep_period,
            irf_sigma,
            clusters: 3,
            exclusion_half_width: None,
            weighting: Weighting::Poisson,
            beating: None,
            passes: 2,
        }
    }

    fn validate(&self) -> Result<()> {
        self.params(1.0, 0.0).validate()?;
        ensure(self.clusters >= 1, "clusters", "must be >= 1")?;
        ensure(self.passes >= 1, "passes", "must be >= 1")?;
        if let Some(w) = self.exclusion_half_width {
            ensure(
                w > 0.0 && w < self.rep_period / 2.0,
                "exclusion_half_width",
                "must lie in (0, rep_period/2)",
            )?;
        }
        Ok(())
    }

    fn params(&self, amplitude: f64, gamma_dp: f64) -> HomModelParams {
        HomModelParams {
            gamma: self.gamma,
            gamma_dp,
            amplitude,
            delta: self.delta,
            rep_period: self.rep_period,
            irf_sigma: self.irf_sigma,
            beating: self.beating,
        }
    }
}

/// Data and model columns of a HOM fit over its fit range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomCurve {
    pub tau_ns: Vec<f64>,
    pub counts: Vec<u64>,
    pub model: Vec<f64>,
    /// The five IRF-convolved peaks of the central cluster, offsets −2δ…2δ.
    pub components: Vec<[f64; 5]>,
    /// `(counts − model)/σ` with the fit's weighting.
    pub residuals: Vec<f64>,
}

impl HomCurve {
    pub fn write_csv<W: Write>(&self, writer: W, provenance: &[(String, String)]) -> Result<()> {
        let mut w = BufWriter::new(writer);
        for (k, v) in provenance {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(
            w,
            "tau_ns,counts,model,peak_m2,peak_m1,peak_0,peak_p1,peak_p2,residual"
        )?;
        for i in 0..self.tau_ns.len() {
            let c = &self.components[i];
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                self.tau_ns[i],
                self.counts[i],
                self.model[i],
                c[0],
                c[1],
                c[2],
                c[3],
                c[4],
                self.residuals[i]
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomFit {
    pub report: FitReport,
    pub curve: HomCurve,
}

/// Model of a HOM histogram split as `A·(base − e^{−2γ_dp|τ|}·coherent)`.
struct HomEvaluator<'a> {
    opts: &'a HomFitOptions,
    grid: BinGrid,
    tau: Vec<f64>,
    counts: Vec<f64>,
    /// Cell-level centre-peak term at full coherence.
    coherent_cells: Vec<f64>,
    cell_abs: Vec<f64>,
    /// Binned distinguishable model for unit amplitude.
    base: Vec<f64>,
}

impl<'a> HomEvaluator<'a> {
    fn new(hist: &Histogram, opts: &'a HomFitOptions) -> Result<Self> {
        let t = opts.rep_period;
        let reach = (opts.clusters as f64 + 0.5) * t;
        let reach_ps = reach * 1e3;
        if (hist.t_min_ps as f64) > -reach_ps || (hist.t_max_ps as f64) < reach_ps {
            return Err(Error::InsufficientData(format!(
                "histogram spans [{}, {}] ps but the fit needs ±{reach_ps} ps ({} clusters each side)",
                hist.t_min_ps, hist.t_max_ps, opts.clusters
            )));
        }
        let inside: Vec<usize> = (0..hist.len())
            .filter(|&k| hist.bin_center_ns(k).abs() <= reach)
            .collect();
        let first = inside[0];
        let n = inside.len();
        let grid = BinGrid::new(hist, first, n, opts.irf_sigma)?;
        let counts: Vec<f64> = hist.counts[first..first + n]
            .iter()
            .map(|&c| c as f64)
            .collect();
        let cells = grid.cell_times();
        let dist = opts.params(1.0, f64::INFINITY);
        let full = opts.params(1.0, 0.0);
        let base_cells: Vec<f64> = cells.iter().map(|&c| hom_model(c, &dist)).collect();
        let coherent_cells: Vec<f64> = cells
            .iter()
            .zip(&base_cells)
            .map(|(&c, b)| b - hom_model(c, &full))
            .collect();
        let base = grid.project(base_cells)?;
        Ok(Self {
            opts,
            tau: (first..first + n).map(|k| hist.bin_center_ns(k)).collect(),
            counts,
            cell_abs: cells.iter().map(|c| c.abs()).collect(),
            coherent_cells,
            base,
            grid,
        })
    }

    /// Binned model for unit amplitude.
    fn shape(&self, gamma_dp: f64) -> Result<Vec<f64>> {
        if gamma_dp.is_infinite() {
            return Ok(self.base.clone());
        }
        let cells = self
            .coherent_cells
            .iter()
            .zip(&self.cell_abs)
            .map(|(c, a)| c * (-2.0 * gamma_dp * a).exp())
            .collect();
        let coherent = self.grid.project(cells)?;
        Ok(self.base.iter().zip(coherent).map(|(b, c)| b - c).collect())
    }

    fn residuals(&self, mask: &[usize], model: &[f64]) -> Vec<f64> {
        let w = self.opts.weighting;
        mask.iter()
            .map(|&i| w.residual(self.counts[i], model[i]))
            .collect()
    }

    fn mask(&self, keep: impl Fn(f64) -> bool) -> Vec<usize> {
        (0..self.tau.len()).filter(|&i| keep(self.tau[i])).collect()
    }
}

fn amplitude_guess(counts: &[f64], shape: &[f64], mask: &[usize]) -> f64 {
    let c: f64 = mask.iter().map(|&i| counts[i]).sum();
    let s: f64 = mask.iter().map(|&i| shape[i]).sum();
    if s > 0.0 && c > 0.0 {
        c / s
    } else {
        1.0
    }
}

fn stage_report(
    name: &str,
    params: &[(&str, Estimate)],
    chi2: f64,
    n: usize,
    iterations: usize,
) -> StageReport {
    let dof = n.saturating_sub(params.len());
    StageReport {
        name: name.to_string(),
        parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        chi2,
        dof,
        chi2_per_dof: if dof > 0 { chi2 / dof as f64 } else { f64::NAN },
        iterations,
    }
}

/// Fits the amplitude alone on the bins in `mask` with the shape fixed.
fn fit_amplitude(
    ev: &HomEvaluator,
    shape: &[f64],
    mask: &[usize],
    stage: &str,
) -> Result<(Estimate, StageReport)> {
    let a0 = amplitude_guess(&ev.counts, shape, mask);
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let model: Vec<f64> = shape.iter().map(|s| x[0] * s).collect();
        Ok(ev.residuals(mask, &model))
    };
    let fit = levenberg_marquardt(
        f,
        &[a0],
        &[0.0],
        &[f64::INFINITY],
        &LmConfig::default(),
        stage,
    )?;
    let est = Estimate::new(fit.params[0], fit.covariance[(0, 0)].max(0.0).sqrt());
    let rep = stage_report(
        stage,
        &[("amplitude", est)],
        fit.chi2,
        mask.len(),
        fit.iterations,
    );
    Ok((est, rep))
}

fn fit_dephasing(
    ev: &HomEvaluator,
    amplitude: f64,
    mask: &[usize],
    stage: &str,
) -> Result<(Estimate, StageReport)> {
    let gamma = ev.opts.gamma;
    let chi2_at = |g: f64| -> Result<f64> {
        let model: Vec<f64> = ev.shape(g)?.iter().map(|s| amplitude * s).collect();
        Ok(ev.residuals(mask, &model).iter().map(|r| r * r).sum())
    };
    let mut start = (0.0, chi2_at(0.0)?);
    for i in 0..=40 {
        let g = gamma * 10f64.powf(-2.0 + 0.1 * i as f64);
        let c = chi2_at(g)?;
        if c < start.1 {
            start = (g, c);
        }
    }
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let model: Vec<f64> = ev.shape(x[0])?.iter().map(|s| amplitude * s).collect();
        Ok(ev.residuals(mask, &model))
    };
    let fit = levenberg_marquardt(
        f,
        &[start.0],
        &[0.0],
        &[1e4 * gamma],
        &LmConfig::default(),
        stage,
    )?;
    let est = Estimate::new(fit.params[0], fit.covariance[(0, 0)].max(0.0).sqrt());
    let rep = stage_report(
        stage,
        &[("gamma_dp", est)],
        fit.chi2,
        mask.len(),
        fit.iterations,
    );
    Ok((est, rep))
}

/// Staged fit of the pulse-pair HOM coincidence model to a delay histogram.
///
/// 1. The amplitude is fitted on the side clusters (`|τ| > T/2`), where all
///    photons are distinguishable; this serves as a consistency check.
/// 2. The amplitude is refitted on all clusters, leaving out `|τ|` below the
///    exclusion half-width around zero.
/// 3. `γ_dp` alone is fitted on the central cluster with the amplitude fixed.
///
/// Stages 2 and 3 are repeated `passes` times so that stage 2 sees the tails
/// of the central peak with the current `γ_dp`. Reported errors come from the
/// joint (amplitude, γ_dp) covariance over the whole fit range. All model
/// curves are convolved with the Gaussian IRF before comparison.
pub fn fit_hom(hist: &Histogram, opts: &HomFitOptions) -> Result<HomFit> {
    opts.validate()?;
    let ev = HomEvaluator::new(hist, opts)?;
    if ev.counts.iter().all(|&c| c == 0.0) {
        return Err(Error::InsufficientData("fit range holds no counts".into()));
    }
    let t = opts.rep_period;
    let excl = opts.exclusion_half_width.unwrap_or(opts.delta / 2.0);
    let side = ev.mask(|tau| tau.abs() > t / 2.0);
    let outer = ev.mask(|tau| tau.abs() >= excl);
    let central = ev.mask(|tau| tau.abs() <= t / 2.0);
    let all: Vec<usize> = (0..ev.tau.len()).collect();

    let mut stages = Vec::new();
    let (a_side, rep) = fit_amplitude(&ev, &ev.base, &side, "side clusters")?;
    stages.push(rep);
    let mut gamma_dp = f64::INFINITY;
    let mut amplitude = a_side;
    for pass in 1..=opts.passes {
        let shape = ev.shape(gamma_dp)?;
        let (a, rep) = fit_amplitude(
            &ev,
            &shape,
            &outer,
            &format!("central exclusion (pass {pass})"),
        )?;
        stages.push(rep);
        amplitude = a;
        let (g, rep) = fit_dephasing(
            &ev,
            a.value,
            &central,
            &format!("central peak (pass {pass})"),
        )?;
        stages.push(rep);
        gamma_dp = g.value;
    }

    let joint = |x: &[f64]| -> Result<Vec<f64>> {
        let model: Vec<f64> = ev.shape(x[1])?.iter().map(|s| x[0] * s).collect();
        Ok(ev.residuals(&all, &model))
    };
    let x = [amplitude.value, gamma_dp];
    let r = joint(&x)?;
    let chi2: f64 = r.iter().map(|v| v * v).sum();
    let j = jacobian(
        &joint,
        &x,
        &r,
        &[0.0, 0.0],
        &[f64::INFINITY, 1e4 * opts.gamma],
    )?;
    let cov = pseudo_inverse(&(j.transpose() * &j));
    let mut report = FitReport::new(
        "hom",
        &["amplitude", "gamma_dp"],
        &x,
        &cov,
        chi2,
        all.len(),
        opts.weighting,
    );
    report.stages = stages;
    report.fixed = BTreeMap::from([
        ("gamma".to_string(), opts.gamma),
        ("delta".to_string(), opts.delta),
        ("rep_period".to_string(), opts.rep_period),
        ("irf_sigma".to_string(), opts.irf_sigma),
        ("exclusion_half_width".to_string(), excl),
        ("clusters".to_string(), opts.clusters as f64),
    ]);
    let sigma_dp = cov[(1, 1)].max(0.0).sqrt();
    let sigma_a = cov[(0, 0)].max(0.0).sqrt();
    report.derived = derived_quantities(opts.gamma, gamma_dp, sigma_dp)?;
    let z = (a_side.value - amplitude.value) / (a_side.error.powi(2) + sigma_a.powi(2)).sqrt();
    report
        .derived
        .insert("amplitude_side_consistency_z".into(), Estimate::exact(z));

    let shape = ev.shape(gamma_dp)?;
    let model: Vec<f64> = shape.iter().map(|s| amplitude.value * s).collect();
    let components = central_components(&ev, &opts.params(amplitude.value, gamma_dp))?;
    let residuals = ev.residuals(&all, &model).iter().map(|r| -r).collect();
    let curve = HomCurve {
        tau_ns: ev.tau.clone(),
        counts: ev.counts.iter().map(|&c| c as u64).collect(),
        model,
        components,
        residuals,
    };
    Ok(HomFit { report, curve })
}

fn central_components(ev: &HomEvaluator, p: &HomModelParams) -> Result<Vec<[f64; 5]>> {
    let cells = ev.grid.cell_times();
    let mut cols = Vec::with_capacity(5);
    for k in 0..5 {
        let v = cells
            .iter()
            .map(|&c| hom_peak_components(c, p, 0)[k])
            .collect();
        cols.push(ev.grid.project(v)?);
    }
    Ok((0..ev.tau.len())
        .map(|i| [cols[0][i], cols[1][i], cols[2][i], cols[3][i], cols[4][i]])
        .collect())
}

/// Expected counts of the IRF-convolved model on the bins of `hist` inside
/// the fit range of `opts`; bins outside are zero.
pub fn hom_expected_counts(
    hist: &Histogram,
    opts: &HomFitOptions,
    amplitude: f64,
    gamma_dp: f64,
) -> Result<Vec<f64>> {
    opts.validate()?;
    let ev = HomEvaluator::new(hist, opts)?;
    let mut out = vec![0.0; hist.len()];
    for (i, s) in ev.shape(gamma_dp)?.iter().enumerate() {
        out[ev.grid.first_bin + i] = amplitude * s;
    }
    Ok(out)
}

/// Visibility, coherence times and energies implied by `(γ, γ_dp ± σ)`.
pub fn derived_quantities(
    gamma: f64,
    gamma_dp: f64,
    sigma_dp: f64,
) -> Result<BTreeMap<String, Estimate>> {
    let v = visibility(gamma, gamma_dp)?;
    let dv = 2.0 * gamma / (gamma + 2.0 * gamma_dp).powi(2) * sigma_dp;
    let t1 = 1.0 / gamma;
    let rate2 = 0.5 * gamma + gamma_dp;
    let mut d = BTreeMap::new();
    d.insert("visibility".to_string(), Estimate::new(v, dv));
    d.insert("t1".to_string(), Estimate::exact(t1));
    if gamma_dp > 0.0 {
        let times = coherence_times(gamma, gamma_dp)?;
        d.insert(
            "t2_star".to_string(),
            Estimate::new(times.t2_star, sigma_dp / gamma_dp.powi(2)),
        );
    } else {
        d.insert(
            "t2_star".to_string(),
            Estimate::new(f64::INFINITY, f64::NAN),
        );
    }
    d.insert(
        "t2".to_string(),
        Estimate::new(1.0 / rate2, sigma_dp / rate2.powi(2)),
    );
    d.insert(
        "decoherence_energy_uev".to_string(),
        Estimate::new(HBAR_UEV_NS * rate2, HBAR_UEV_NS * sigma_dp),
    );
    d.insert(
        "dephasing_energy_uev".to_string(),
        Estimate::new(HBAR_UEV_NS * gamma_dp, HBAR_UEV_NS * sigma_dp),
    );
    Ok(d)
}

/// Area-ratio visibility `1 − S0/S1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaVisibility {
    pub visibility: f64,
    pub error: f64,
    /// Counts in the window around zero delay.
    pub s0: f64,
    /// Mean counts in the windows around ±δ.
    pub s1: f64,
}

/// Visibility from the centre-peak area relative to the mean of the ±δ
/// peaks, with Poisson errors. Times in ns.
///
/// When neighbouring peaks overlap (small `γ·δ`) the tails of the ±δ and ±2δ
/// peaks fall into the centre window, so with windows spanning whole peaks
/// (close to δ) this estimator is biased low: even perfectly
/// indistinguishable photons do not give `S0 = 0`. Windows much narrower than
/// the peaks instead over-weight the dip at zero delay and bias it high.
pub fn area_visibility(
    hist: &Histogram,
    delta: f64,
    integration_window: f64,
) -> Result<AreaVisibility> {
    ensure(delta > 0.0, "delta", "must be > 0")?;
    ensure(
        integration_window > 0.0,
        "integration_window",
        "must be > 0",
    )?;
    if integration_window > delta {
        return Err(Error::invalid(
            "integration_window",
            format!("window {integration_window} ns exceeds the peak spacing {delta} ns, windows overlap"),
        ));
    }
    let half = integration_window * 1e3 / 2.0;
    let d = delta * 1e3;
    ensure(
        (hist.t_min_ps as f64) <= -d - half && (hist.t_max_ps as f64) >= d + half,
        "histogram",
        "does not cover the ±δ windows",
    )?;
    let s0 = hist.sum_centres_in(-half, half) as f64;
    let sa = hist.sum_centres_in(-d - half, -d + half) as f64;
    let sb = hist.sum_centres_in(d - half, d + half) as f64;
    let s1 = 0.5 * (sa + sb);
    if s1 <= 0.0 {
        return Err(Error::InsufficientData(
            "no counts in the ±δ windows".into(),
        ));
    }
    let ratio = s0 / s1;
    let error = (s0.max(1.0) / (s1 * s1) + ratio * ratio / (sa + sb)).sqrt();
    Ok(AreaVisibility {
        visibility: 1.0 - ratio,
        error,
        s0,
        s1,
    })
}

/// Free-amplitude decomposition of every peak in the fit range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDecomposition {
    pub clusters: Vec<i32>,
    /// Peak areas (counts), five per cluster.
    pub areas: Vec<[f64; 5]>,
    /// Covariance of the flattened areas, cluster-major.
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub dof: usize,
}

impl PeakDecomposition {
    /// z-scores of each peak against the pattern `weights` scaled to the
    /// cluster total.
    pub fn pattern_z(&self, cluster: i32, weights: &[f64; 5]) -> Option<[f64; 5]> {
        let c = self.clusters.iter().position(|&x| x == cluster)?;
        let wsum: f64 = weights.iter().sum();
        let base = 5 * c;
        let mut z = [0.0; 5];
        for j in 0..5 {
            // linear combination a_j − f_j·Σa
            let f = weights[j] / wsum;
            let coef: Vec<f64> = (0..5).map(|k| if k == j { 1.0 - f } else { -f }).collect();
            let value: f64 = (0..5).map(|k| coef[k] * self.areas[c][k]).sum();
            let mut var = 0.0;
            for a in 0..5 {
                for b in 0..5 {
                    var += coef[a] * coef[b] * self.covariance[base + a][base + b];
                }
            }
            z[j] = value / var.max(1e-300).sqrt();
        }
        Some(z)
    }
}

/// Linear least-squares decomposition of a HOM histogram into individual
/// peaks with free areas.
///
/// Every peak has the IRF-convolved two-sided exponential shape; the centre
/// peak of the central cluster uses the dephasing-dependent shape with
/// `options`' γ and the given `gamma_dp` (`+inf` for distinguishable photons).
/// Clusters beyond the fit range enter with one shared free scale. Weights
/// are iterated from the data variance to the model variance.
pub fn decompose_hom_peaks(
    hist: &Histogram,
    opts: &HomFitOptions,
    gamma_dp: f64,
) -> Result<PeakDecomposition> {
    opts.validate()?;
    let ev = HomEvaluator::new(hist, opts)?;
    let k = opts.clusters as i32;
    let cells = ev.grid.cell_times();
    let unit = opts.params(1.0, gamma_dp);
    let bw = hist.bin_width_ns();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut areas_per_column = Vec::new();
    let clusters: Vec<i32> = (-k..=k).collect();
    for &c in &clusters {
        for j in 0..5 {
            let v: Vec<f64> = cells
                .iter()
                .map(|&t| {
                    let w = crate::model::hom_cluster_weights(c)[j];
                    hom_peak_components(t, &unit, c)[j] / w
                })
                .collect();
            let area = peak_integral(&unit, c, j) / bw;
            columns.push(ev.grid.project(v)?);
            areas_per_column.push(area);
        }
    }
    let outside: Vec<f64> = cells
        .iter()
        .map(|&t| {
            let nearest = (t / opts.rep_period).round() as i32;
            (nearest - crate::model::CLUSTER_REACH..=nearest + crate::model::CLUSTER_REACH)
                .filter(|c| c.abs() > k)
                .map(|c| crate::model::hom_coincidence_density(t, &unit, c))
                .sum()
        })
        .collect();
    columns.push(ev.grid.project(outside)?);

    let n = ev.tau.len();
    let p = columns.len();
    let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let y = DVector::from_iterator(n, ev.counts.iter().copied());
    let mut var: Vec<f64> = ev.counts.iter().map(|c| c.max(1.0)).collect();
    let mut coef = DVector::zeros(p);
    let mut cov = DMatrix::zeros(p, p);
    for _ in 0..6 {
        let w = DVector::from_iterator(n, var.iter().map(|v| 1.0 / v));
        let xw = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * w[i]);
        let xtwx = x.transpose() * &xw;
        cov = pseudo_inverse(&xtwx);
        coef = &cov * (xw.transpose() * &y);
        let fitted = &x * &coef;
        var = fitted.iter().map(|f| f.max(1e-3)).collect();
    }
    let fitted = &x * &coef;
    let chi2 = (0..n).map(|i| (fitted[i] - y[i]).powi(2) / var[i]).sum();
    let m = clusters.len() * 5;
    let areas = (0..clusters.len())
        .map(|c| {
            let mut a = [0.0; 5];
            for j in 0..5 {
                a[j] = coef[5 * c + j] * areas_per_column[5 * c + j];
            }
            a
        })
        .collect();
    let covariance = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| cov[(a, b)] * areas_per_column[a] * areas_per_column[b])
                .collect()
        })
        .collect();
    Ok(PeakDecomposition {
        clusters,
        areas,
        covariance,
        chi2,
        dof: n.saturating_sub(p),
    })
}

/// Integral over τ (ns) of one unit-weight peak.
fn peak_integral(p: &HomModelParams, cluster: i32, j: usize) -> f64 {
    if cluster != 0 || j != 2 || p.gamma_dp.is_infinite() {
        return 2.0 / p.gamma;
    }
    if p.beating.is_none() {
        return 2.0 / p.gamma - 2.0 / (p.gamma + 2.0 * p.gamma_dp);
    }
    // numeric: trapezoid on a fine grid over both half-lines
    let span = 60.0 / p.gamma;
    let steps = 400_000;
    let h = span / steps as f64;
    let f = |t: f64| hom_peak_components(t, p, 0)[2];
    let mut s = 0.5 * (f(0.0) + f(span));
    for i in 1..steps {
        s += f(i as f64 * h);
    }
    2.0 * s * h
}
