use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::collection::{EfficiencyEstimate, Method};
use super::measured::{Interval, Measured};
use super::preparation::PreparationBounds;

/// Collected efficiency results of one evaluation; absent entries were not
/// requested.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub model: String,
    pub method: Option<Method>,
    pub assumption: Option<String>,
    pub eta_x: Option<Measured>,
    pub eta_x_bounds: Option<Interval<Measured>>,
    pub eta_qe: Option<Measured>,
    pub epsilon_bounds: Option<Interval<Measured>>,
    pub occupation_bounds: Option<Interval<f64>>,
    pub xi_ratio_bounds: Option<Interval<f64>>,
    pub alpha_upper: Option<f64>,
    pub rho: Option<f64>,
    pub eta_ratio: Option<f64>,
    pub provenance: BTreeMap<String, String>,
}

impl EfficiencyReport {
    pub fn new() -> Self {
        Self {
            model: "efficiency".into(),
            ..Self::default()
        }
    }

    pub fn with_estimate(mut self, e: &EfficiencyEstimate) -> Self {
        self.method = Some(e.method);
        self.assumption = Some(e.assumption.clone());
        self.eta_x = Some(e.eta);
        self
    }

    pub fn with_bounds(mut self, b: &Interval<EfficiencyEstimate>) -> Self {
        self.method = Some(Method::Absolute);
        self.assumption = Some(format!("{} .. {}", b.lower.assumption, b.upper.assumption));
        self.eta_x_bounds = Some(Interval {
            lower: b.lower.eta,
            upper: b.upper.eta,
        });
        self
    }

    pub fn with_preparation(mut self, p: &PreparationBounds) -> Self {
        self.eta_qe = Some(p.eta_qe);
        self.epsilon_bounds = Some(p.epsilon);
        self.occupation_bounds = Some(p.occupation);
        self.xi_ratio_bounds = Some(p.xi_ratio);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
