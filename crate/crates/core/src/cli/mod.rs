//! The `photonlab` command-line interface.
//!
//! Exit codes: 0 success, 2 usage or schema error, 3 numerical failure,
//! 4 I/O error.

mod commands;
mod provenance;
mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::StreamOutput;
use crate::error::Error;
use crate::inference::Weighting;

pub use provenance::Provenance;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "PHOTONLAB_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "photonlab",
    version,
    about = "Single-photon source simulation and analysis"
)]
pub struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for output files with relative paths.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// A configuration file or the name of a bundled one.
#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
pub struct ConfigSource {
    /// Run configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Name of a bundled configuration (qd1_hbt, qd2_hbt, hom_lo, hom_la).
    #[arg(long)]
    pub bundled: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Binary,
    Csv,
    Both,
}

impl From<FormatArg> for StreamOutput {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Binary => StreamOutput::Binary,
            FormatArg::Csv => StreamOutput::Csv,
            FormatArg::Both => StreamOutput::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Neyman,
    Pearson,
    Poisson,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Neyman => Weighting::Neyman,
            WeightingArg::Pearson => Weighting::Pearson,
            WeightingArg::Poisson => Weighting::Poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EfficiencyMethod {
    /// Saturated count rate relative to a reference emitter.
    Relative,
    /// Count rate over setup transmission and repetition rate.
    Absolute,
    /// Absolute efficiency bounded by preparation and mixing bounds.
    Bounds,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a time-tag stream.
    Simulate {
        #[command(flatten)]
        source: ConfigSource,
        /// Override the number of repetition periods.
        #[arg(long)]
        periods: Option<u64>,
        /// Override the RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Output path stem; extensions are added.
        #[arg(long, default_value = "stream")]
        out: PathBuf,
    },
    /// Cross-correlate channel 1 against channel 0 of a stream.
    Correlate {
        /// Stream file (`.csv` or binary).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        bin_width_ps: u64,
        /// Window half-width in ns.
        #[arg(long, default_value_t = 50.0)]
        window: f64,
        /// Number of parallel time slices.
        #[arg(long, default_value_t = 1)]
        slices: usize,
        #[arg(long, default_value = "histogram.csv")]
        out: PathBuf,
    },
    /// g²(0) from a correlation histogram.
    G2 {
        #[arg(long)]
        hist: PathBuf,
        /// Repetition period in ns.
        #[arg(long)]
        rep_period: f64,
        /// Integration window per peak in ns.
        #[arg(long, default_value_t = 2.0)]
        center_window: f64,
        /// Span of side peaks used for normalisation in ns.
        #[arg(long, default_value_t = 300.0)]
        norm_span: f64,
        #[arg(long, default_value = "g2.json")]
        out: PathBuf,
    },
    /// Long-delay repetition-peak amplitude statistics.
    Peaks {
        #[arg(long)]
        hist: PathBuf,
        #[arg(long)]
        rep_period: f64,
        /// Largest delay in ms.
        #[arg(long, default_value_t = 10.0)]
        max_delay: f64,
        #[arg(long, default_value = "peaks.json")]
        out: PathBuf,
    },
    /// Fit the HOM cluster model to a correlation histogram.
    FitHom {
        #[arg(long)]
        hist: PathBuf,
        #[command(flatten)]
        source: ConfigSource,
        /// Decay rate in ns⁻¹.
        #[arg(long)]
        gamma: Option<f64>,
        /// Interferometer delay in ns.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        rep_period: Option<f64>,
        /// Coincidence IRF width in ns.
        #[arg(long)]
        irf_sigma: Option<f64>,
        #[arg(long, value_enum)]
        weighting: Option<WeightingArg>,
        #[arg(long, default_value = "hom_fit.json")]
        out: PathBuf,
        #[arg(long, default_value = "hom_curve.csv")]
        curve: PathBuf,
    },
    /// Fit a saturation curve to a `power,counts,error` CSV.
    FitSat {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "saturation_fit.json")]
        out: PathBuf,
        #[arg(long, default_value = "saturation_curve.csv")]
        curve: PathBuf,
    },
    /// Fit a bi-exponential decay to the arrival phases of a stream.
    FitLifetime {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rep_period: f64,
        /// Time of an excitation pulse on the stream clock, in ns.
        #[arg(long)]
        pulse_offset: f64,
        /// Single-detector IRF width in ns.
        #[arg(long)]
        irf_sigma: f64,
        #[arg(long, default_value_t = 50)]
        bin_width_ps: u64,
        #[arg(long, default_value = "lifetime_fit.json")]
        out: PathBuf,
    },
    /// Collection-efficiency relations and bounds.
    Efficiency(EfficiencyArgs),
    /// β-factor and efficiency versus emitter–cavity detuning.
    Cavity {
        #[command(flatten)]
        source: ConfigSource,
        /// Largest |detuning| in nm.
        #[arg(long, default_value_t = 10.0)]
        span: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value = "cavity.csv")]
        out: PathBuf,
    },
    /// Run the bundled pipeline and compare with the reference tables.
    Reproduce {
        /// Divide every simulated period count by this factor.
        #[arg(long, default_value_t = 1)]
        reduce: u64,
    },
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[arg(long, value_enum)]
    pub method: EfficiencyMethod,
    /// Saturated count rate of the emitter (s⁻¹), relative method.
    #[arg(long)]
    pub csat_qd: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub csat_qd_err: f64,
    /// Saturated count rate of the reference emitter (s⁻¹).
    #[arg(long)]
    pub csat_bulk: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub csat_bulk_err: f64,
    /// Collection efficiency of the reference emitter.
    #[arg(long)]
    pub eta_bulk: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eta_bulk_err: f64,
    /// Saturated single-line count rate (s⁻¹), absolute methods.
    #[arg(long)]
    pub csat: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub csat_err: f64,
    #[arg(long)]
    pub eta_setup: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eta_setup_err: f64,
    /// Laser repetition rate (s⁻¹).
    #[arg(long)]
    pub rep_rate: Option<f64>,
    /// Product of mixing and preparation efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub alpha_eps: f64,
    /// Upper bound on the polarization mixing α.
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Slow-to-fast decay intensity ratio; sets the α bound.
    #[arg(long, conflicts_with = "alpha_max")]
    pub i_slow_over_i_fast: Option<f64>,
    /// Charged-to-neutral exciton intensity ratio.
    #[arg(long)]
    pub ix2_over_ix: Option<f64>,
    /// Quantum efficiency of the charged line relative to the neutral one.
    #[arg(long, default_value_t = 1.0)]
    pub qe_ratio: f64,
    /// Fast decay rate (ns⁻¹).
    #[arg(long)]
    pub gamma_fast: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_fast_err: f64,
    /// Non-radiative decay rate (ns⁻¹).
    #[arg(long)]
    pub gamma_nrad: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_nrad_err: f64,
    /// Monte Carlo error propagation with this many samples.
    #[arg(long)]
    pub monte_carlo: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "efficiency.json")]
    pub out: PathBuf,
}

/// Maps a library error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. }
        | Error::Config { .. }
        | Error::Format(_)
        | Error::UnsortedStream { .. }
        | Error::TimestampOverflow(_) => EXIT_USAGE,
        Error::UndersampledKernel { .. }
        | Error::InsufficientData(_)
        | Error::NonConvergence { .. }
        | Error::ProbabilityOutOfRange { .. } => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Results go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let command_line = provenance::command_line(&args);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            let _ = writeln!(stderr, "error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start thread pool: {e}");
            return EXIT_IO;
        }
    };
    let name = subcommand_name(&cli.command);
    let mut buffer = Vec::new();
    let result = pool.install(|| commands::dispatch(&cli, &command_line, &mut buffer));
    let _ = stdout.write_all(&buffer);
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {name}: {e}");
            exit_code(&e)
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate { .. } => "simulate",
        Command::Correlate { .. } => "correlate",
        Command::G2 { .. } => "g2",
        Command::Peaks { .. } => "peaks",
        Command::FitHom { .. } => "fit-hom",
        Command::FitSat { .. } => "fit-sat",
        Command::FitLifetime { .. } => "fit-lifetime",
        Command::Efficiency(_) => "efficiency",
        Command::Cavity { .. } => "cavity",
        Command::Reproduce { .. } => "reproduce",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x", "y")), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::InsufficientData("x".into())),
            EXIT_NUMERICAL
        );
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["photonlab", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run(["photonlab", "--help"], &mut o, &mut e), EXIT_OK);
    }
}
