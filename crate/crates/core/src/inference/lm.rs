//! Bounded Levenberg–Marquardt on weighted residuals.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Relative χ² change below which an accepted step ends the fit.
    pub chi2_tolerance: f64,
    /// Relative step length below which the fit ends.
    pub step_tolerance: f64,
    pub initial_lambda: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            chi2_tolerance: 1e-12,
            step_tolerance: 1e-12,
            initial_lambda: 1e-3,
        }
    }
}

/// Result of a converged fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// `(JᵀJ)⁻¹` at the solution.
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub n_residuals: usize,
    pub iterations: usize,
}

fn chi2(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Central-difference Jacobian of the residual vector, one-sided at bounds.
pub fn jacobian<F>(
    f: &F,
    x: &[f64],
    r0: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut j = DMatrix::zeros(r0.len(), x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let h = 1e-6 * x[k].abs().max(1e-6);
        let (lo, hi) = ((x[k] - h).max(lower[k]), (x[k] + h).min(upper[k]));
        xp[k] = hi;
        let rp = if hi > x[k] { f(&xp)? } else { r0.to_vec() };
        xp[k] = lo;
        let rm = if lo < x[k] { f(&xp)? } else { r0.to_vec() };
        xp[k] = x[k];
        let span = hi - lo;
        for i in 0..r0.len() {
            j[(i, k)] = (rp[i] - rm[i]) / span;
        }
    }
    Ok(j)
}

/// Pseudo-inverse of a symmetric positive semidefinite matrix.
pub fn pseudo_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let svd = a.clone().svd(true, true);
    let max_s = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.pseudo_inverse(max_s * 1e-14 * n as f64)
        .unwrap_or_else(|_| DMatrix::zeros(n, n))
}

/// Minimises `Σ rᵢ(x)²` within `[lower, upper]`.
///
/// `residuals` returns weighted residuals `(model − data)/σ`. The stage label
/// is used in the non-convergence error.
pub fn levenberg_marquardt<F>(
    residuals: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    config: &LmConfig,
    stage: &str,
) -> Result<LmFit>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let clamp = |x: &mut [f64]| {
        for k in 0..n {
            x[k] = x[k].clamp(lower[k], upper[k]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = residuals(&x)?;
    let mut c2 = chi2(&r);
    if !c2.is_finite() {
        return Err(Error::NonConvergence {
            stage: stage.into(),
            iterations: 0,
            chi2_per_dof: c2,
        });
    }
    let mut lambda = config.initial_lambda;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let j = jacobian(&residuals, &x, &r, lower, upper)?;
        let mut jtj = j.transpose() * &j;
        let mut g = j.transpose() * DVector::from_column_slice(&r);
        // parameters pinned at a bound by the gradient stay fixed this step
        for k in 0..n {
            let pinned = (x[k] <= lower[k] && g[k] > 0.0) || (x[k] >= upper[k] && g[k] < 0.0);
            if pinned {
                jtj.row_mut(k).fill(0.0);
                jtj.column_mut(k).fill(0.0);
                jtj[(k, k)] = 1.0;
                g[k] = 0.0;
            }
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            clamp(&mut trial);
            let rt = residuals(&trial)?;
            let ct = chi2(&rt);
            if ct.is_finite() && ct <= c2 {
                let dx = trial
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| ((a - b) / b.abs().max(1e-12)).abs())
                    .fold(0.0, f64::max);
                let dc = c2 - ct;
                x = trial;
                r = rt;
                c2 = ct;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if dc <= config.chi2_tolerance * c2 || dx <= config.step_tolerance || c2 == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step exists at any damping: a local minimum
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        let dof = r.len().saturating_sub(n).max(1);
        return Err(Error::NonConvergence {
            stage: stage.into(),
            iterations,
            chi2_per_dof: c2 / dof as f64,
        });
    }
    let j = jacobian(&residuals, &x, &r, lower, upper)?;
    let covariance = pseudo_inverse(&(j.transpose() * &j));
    Ok(LmFit {
        params: x,
        covariance,
        chi2: c2,
        n_residuals: r.len(),
        iterations,
    })
}
