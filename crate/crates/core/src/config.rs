//! Run configuration files.
//!
//! A run configuration is a TOML document with the sections `emitter`,
//! `schedule`, `chain`, `cavity`, `simulation` and `fit`. Every key maps onto
//! a field of the corresponding library type; unknown keys are rejected.
//!
//! ```toml
//! [emitter]
//! gamma_fast = 0.621
//! gamma_dp = 2.04
//!
//! [schedule]
//! rep_period = 13.0
//! pulses_per_period = 2
//! intra_delay = 3.04
//! power_ratio = 5.0
//!
//! [chain]
//! eta_first_lens = 0.5
//! eta_setup = 0.6
//! irf_sigma = 0.1
//!
//! [simulation]
//! n_periods = 1000000
//! rng_seed = 7
//! mode = "hom"
//!
//! [fit]
//! irf_sigma = 0.1414
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::inference::{HomFitOptions, LifetimeOptions, Weighting};
use crate::model::{Beating, CavityCoupling, DetectionChain, EmitterSpec, ExcitationSchedule};
use crate::simulator::{InterferenceSampler, Mode, SimConfig};

/// File format of simulated streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamOutput {
    #[default]
    Binary,
    Csv,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub n_periods: u64,
    pub rng_seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub sampler: InterferenceSampler,
    /// Output directory; relative paths are taken relative to the working
    /// directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub stream_format: StreamOutput,
}

/// Correlation and fit settings. Times in ns unless suffixed `_ps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Gaussian IRF width of a coincidence histogram. Required by every fit;
    /// there is no default.
    pub irf_sigma: Option<f64>,
    /// IRF width of a single detector, used by the lifetime fit.
    pub detector_irf_sigma: Option<f64>,
    pub bin_width_ps: u64,
    /// Correlation window half-width.
    pub window: f64,
    pub weighting: Weighting,
    pub clusters: usize,
    pub exclusion_half_width: Option<f64>,
    pub passes: usize,
    /// Include fine-structure beating in the HOM model.
    pub beating: bool,
    /// g²(0) integration window per peak.
    pub g2_center_window: f64,
    /// Span of side peaks averaged for g²(0) normalisation.
    pub g2_norm_span: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            irf_sigma: None,
            detector_irf_sigma: None,
            bin_width_ps: 50,
            window: 50.0,
            weighting: Weighting::Poisson,
            clusters: 3,
            exclusion_half_width: None,
            passes: 2,
            beating: false,
            g2_center_window: 2.0,
            g2_norm_span: 300.0,
        }
    }
}

/// A parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub emitter: EmitterSpec,
    #[serde(default)]
    pub schedule: ExcitationSchedule,
    #[serde(default)]
    pub chain: DetectionChain,
    #[serde(default)]
    pub cavity: CavityCoupling,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub fit: FitSection,
}

/// Configurations shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("qd1_hbt", include_str!("../configs/qd1_hbt.cfg")),
    ("qd2_hbt", include_str!("../configs/qd2_hbt.cfg")),
    ("hom_lo", include_str!("../configs/hom_lo.cfg")),
    ("hom_la", include_str!("../configs/hom_la.cfg")),
];

/// 1-based line of the byte offset `pos` in `text`.
fn line_of(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

/// Line defining `section.key`, falling back to the section header, or 0.
fn locate(text: &str, dotted: &str) -> usize {
    let (section, key) = dotted.split_once('.').unwrap_or(("", dotted));
    let mut current = String::new();
    let mut header = 0;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = i + 1;
            }
            continue;
        }
        if current == section || section.is_empty() {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return i + 1;
                }
            }
        }
    }
    header
}

impl RunConfig {
    /// Parses and validates a configuration, attaching line numbers to
    /// schema and validation errors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Config {
                line: locate(text, &name),
                message: format!("`{name}`: {reason}"),
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Text of a bundled configuration.
    pub fn bundled_text(name: &str) -> Option<&'static str> {
        let name = name.strip_suffix(".cfg").unwrap_or(name);
        BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
    }

    pub fn bundled(name: &str) -> Result<Self> {
        let text = Self::bundled_text(name)
            .ok_or_else(|| Error::invalid("config", format!("no bundled config `{name}`")))?;
        Self::from_toml_str(text)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim_config().validate()?;
        self.cavity.validate()?;
        let f = &self.fit;
        if let Some(s) = f.irf_sigma {
            ensure(
                s >= 0.0 && s.is_finite(),
                "fit.irf_sigma",
                "must be finite and >= 0",
            )?;
        }
        if let Some(s) = f.detector_irf_sigma {
            ensure(
                s >= 0.0 && s.is_finite(),
                "fit.detector_irf_sigma",
                "must be finite and >= 0",
            )?;
        }
        ensure(f.bin_width_ps >= 1, "fit.bin_width_ps", "must be >= 1")?;
        ensure(
            f.window > 0.0 && f.window.is_finite(),
            "fit.window",
            "must be finite and > 0",
        )?;
        ensure(
            f.g2_center_window > 0.0 && f.g2_center_window <= self.schedule.rep_period,
            "fit.g2_center_window",
            "must lie in (0, rep_period]",
        )?;
        ensure(f.g2_norm_span > 0.0, "fit.g2_norm_span", "must be > 0")?;
        ensure(f.clusters >= 1, "fit.clusters", "must be >= 1")?;
        ensure(f.passes >= 1, "fit.passes", "must be >= 1")?;
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        let mut c = SimConfig::new(
            self.emitter.clone(),
            self.schedule.clone(),
            self.chain.clone(),
            self.simulation.mode,
            self.simulation.n_periods,
            self.simulation.rng_seed,
        );
        c.sampler = self.simulation.sampler;
        c
    }

    fn fit_irf(&self) -> Result<f64> {
        self.fit.irf_sigma.ok_or_else(|| {
            Error::invalid(
                "fit.irf_sigma",
                "required for fitting; no default is assumed",
            )
        })
    }

    /// Correlation window half-width in ps, rounded up to whole bins.
    pub fn window_ps(&self) -> u64 {
        let w = self.fit.bin_width_ps;
        ((self.fit.window * 1e3 / w as f64).ceil() as u64) * w
    }

    pub fn hom_fit_options(&self) -> Result<HomFitOptions> {
        let mut o = HomFitOptions::new(
            self.emitter.gamma_fast,
            self.schedule.intra_delay,
            self.schedule.rep_period,
            self.fit_irf()?,
        );
        o.clusters = self.fit.clusters;
        o.exclusion_half_width = self.fit.exclusion_half_width;
        o.weighting = self.fit.weighting;
        o.passes = self.fit.passes;
        if self.fit.beating {
            let omega = self
                .emitter
                .fss_beat
                .ok_or_else(|| Error::invalid("fit.beating", "needs emitter.fss_beat"))?;
            o.beating = Some(Beating::from_alpha(omega, self.chain.alpha_mix));
        }
        Ok(o)
    }

    pub fn lifetime_options(&self) -> Result<LifetimeOptions> {
        let irf = self.fit.detector_irf_sigma.ok_or_else(|| {
            Error::invalid("fit.detector_irf_sigma", "required for the lifetime fit")
        })?;
        let mut o = LifetimeOptions::new(self.schedule.rep_period, irf);
        o.weighting = self.fit.weighting;
        Ok(o)
    }
}
