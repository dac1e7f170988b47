use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    #[serde(with = "crate::serde_f64")]
    pub value: f64,
    #[serde(with = "crate::serde_f64")]
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

/// How bins are weighted in χ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Variance `max(counts, 1)` from the data.
    Neyman,
    /// Variance from the current model prediction.
    Pearson,
    /// Standard errors supplied with the data.
    Supplied,
    /// Poisson likelihood: signed deviance residuals, so that χ² is the
    /// deviance `2Σ(m − n + n ln(n/m))`.
    #[default]
    Poisson,
}

impl Weighting {
    /// Standard deviation of a bin holding `counts` with model value `model`.
    pub fn sigma(self, counts: f64, model: f64) -> f64 {
        match self {
            Weighting::Neyman | Weighting::Supplied => counts.max(1.0).sqrt(),
            Weighting::Pearson | Weighting::Poisson => model.max(1e-3).sqrt(),
        }
    }

    /// Signed residual `(model − counts)/σ`, or the signed deviance residual
    /// for [`Weighting::Poisson`].
    pub fn residual(self, counts: f64, model: f64) -> f64 {
        match self {
            Weighting::Poisson => {
                let m = model.max(1e-12);
                let log_term = if counts > 0.0 {
                    counts * (counts / m).ln()
                } else {
                    0.0
                };
                let d = (2.0 * (m - counts + log_term)).max(0.0);
                d.sqrt().copysign(m - counts)
            }
            _ => (model - counts) / self.sigma(counts, model),
        }
    }
}

/// Summary of one stage of a multi-stage fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub parameters: BTreeMap<String, Estimate>,
    pub chi2: f64,
    pub dof: usize,
    #[serde(with = "crate::serde_f64")]
    pub chi2_per_dof: f64,
    pub iterations: usize,
}

/// Fitted parameters, covariance, goodness of fit and derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub parameters: BTreeMap<String, Estimate>,
    /// Inputs held fixed during the fit.
    pub fixed: BTreeMap<String, f64>,
    /// Row/column order of `covariance`.
    pub parameter_order: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub dof: usize,
    #[serde(with = "crate::serde_f64")]
    pub chi2_per_dof: f64,
    pub derived: BTreeMap<String, Estimate>,
    pub stages: Vec<StageReport>,
    pub weighting: Weighting,
    pub provenance: BTreeMap<String, String>,
}

impl FitReport {
    pub(crate) fn new(
        model: &str,
        names: &[&str],
        values: &[f64],
        covariance: &DMatrix<f64>,
        chi2: f64,
        n_points: usize,
        weighting: Weighting,
    ) -> Self {
        let parameters = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.to_string(),
                    Estimate::new(values[i], covariance[(i, i)].max(0.0).sqrt()),
                )
            })
            .collect();
        let dof = n_points.saturating_sub(names.len());
        Self {
            model: model.to_string(),
            parameters,
            fixed: BTreeMap::new(),
            parameter_order: names.iter().map(|s| s.to_string()).collect(),
            covariance: (0..names.len())
                .map(|i| (0..names.len()).map(|j| covariance[(i, j)]).collect())
                .collect(),
            chi2,
            dof,
            chi2_per_dof: if dof > 0 { chi2 / dof as f64 } else { f64::NAN },
            derived: BTreeMap::new(),
            stages: Vec::new(),
            weighting,
            provenance: BTreeMap::new(),
        }
    }

    pub fn param(&self, name: &str) -> Option<Estimate> {
        self.parameters.get(name).copied()
    }

    pub fn derived(&self, name: &str) -> Option<Estimate> {
        self.derived.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Format(e.to_string()))
    }
}
