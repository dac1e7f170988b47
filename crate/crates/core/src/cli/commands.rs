use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::provenance::Provenance;
use super::{reproduce, Cli, Command, ConfigSource, EfficiencyArgs, EfficiencyMethod};
use crate::config::{RunConfig, StreamOutput};
use crate::correlator::{correlate, correlate_sliced, g2_zero, peak_amplitude_scan, Histogram};
use crate::efficiency::{
    alpha_upper_bound, eta_absolute, eta_absolute_bounds, eta_relative,
    preparation_bounds_with_qe_ratio, EfficiencyReport, Interval, Measured, Propagation,
};
use crate::error::{ensure, Error, Result};
use crate::inference::{
    fit_hom, fit_lifetime, fit_saturation, phase_histogram, HomFitOptions, LifetimeOptions,
    SaturationPoint,
};
use crate::model::{beta_and_efficiency, saturation_curve, CavityCoupling};
use crate::simulator::{read_stream, simulate, write_binary, write_csv};

struct Ctx<'a> {
    out_dir: Option<PathBuf>,
    command_line: &'a str,
}

impl Ctx<'_> {
    fn provenance(&self) -> Provenance {
        Provenance::new(self.command_line)
    }

    /// Resolves an output path against the output directory and creates its
    /// parent directory.
    fn output(&self, path: &Path, fallback_dir: Option<&Path>) -> Result<PathBuf> {
        let dir = self.out_dir.as_deref().or(fallback_dir);
        let p = match dir {
            Some(d) if path.is_relative() => d.join(path),
            _ => path.to_path_buf(),
        };
        if let Some(parent) = p.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        Ok(p)
    }
}

pub(super) fn dispatch(cli: &Cli, command_line: &str, stdout: &mut dyn Write) -> Result<()> {
    let ctx = Ctx {
        out_dir: cli.out_dir.clone(),
        command_line,
    };
    match &cli.command {
        Command::Simulate {
            source,
            periods,
            seed,
            format,
            out,
        } => {
            let mut cfg = load(source)?;
            if let Some(p) = periods {
                cfg.simulation.n_periods = *p;
            }
            if let Some(s) = seed {
                cfg.simulation.rng_seed = *s;
            }
            if let Some(f) = format {
                cfg.simulation.stream_format = (*f).into();
            }
            cfg.validate()?;
            cmd_simulate(&ctx, &cfg, out, stdout)
        }
        Command::Correlate {
            input,
            bin_width_ps,
            window,
            slices,
            out,
        } => cmd_correlate(&ctx, input, *bin_width_ps, *window, *slices, out, stdout),
        Command::G2 {
            hist,
            rep_period,
            center_window,
            norm_span,
            out,
        } => cmd_g2(
            &ctx,
            hist,
            *rep_period,
            *center_window,
            *norm_span,
            out,
            stdout,
        ),
        Command::Peaks {
            hist,
            rep_period,
            max_delay,
            out,
        } => {
            let h = read_histogram(hist)?;
            let stats = peak_amplitude_scan(&h, *rep_period, *max_delay)?;
            let mut prov = ctx.provenance();
            prov.input("histogram", hist)?;
            writeln!(
                stdout,
                "{} peaks, amplitude spread {:.4} (Poisson {:.4}), excess z = {:.2}",
                stats.areas.len(),
                stats.amplitude_std_fraction,
                stats.poisson_std_fraction,
                stats.excess_significance
            )?;
            write_json(&ctx.output(out, None)?, &stats, &prov)
        }
        Command::FitHom {
            hist,
            source,
            gamma,
            delta,
            rep_period,
            irf_sigma,
            weighting,
            out,
            curve,
        } => {
            let mut opts = match (&source.config, &source.bundled) {
                (None, None) => HomFitOptions::new(
                    required(*gamma, "--gamma")?,
                    required(*delta, "--delta")?,
                    required(*rep_period, "--rep-period")?,
                    required(*irf_sigma, "--irf-sigma")?,
                ),
                _ => load(source)?.hom_fit_options()?,
            };
            if let Some(v) = gamma {
                opts.gamma = *v;
            }
            if let Some(v) = delta {
                opts.delta = *v;
            }
            if let Some(v) = rep_period {
                opts.rep_period = *v;
            }
            if let Some(v) = irf_sigma {
                opts.irf_sigma = *v;
            }
            if let Some(w) = weighting {
                opts.weighting = (*w).into();
            }
            cmd_fit_hom(&ctx, hist, &opts, out, curve, stdout)
        }
        Command::FitSat { input, out, curve } => cmd_fit_sat(&ctx, input, out, curve, stdout),
        Command::FitLifetime {
            input,
            rep_period,
            pulse_offset,
            irf_sigma,
            bin_width_ps,
            out,
        } => {
            let stream = read_stream(input)?;
            let phase = phase_histogram(&stream, *rep_period, *pulse_offset, *bin_width_ps)?;
            let mut report = fit_lifetime(&phase, &LifetimeOptions::new(*rep_period, *irf_sigma))?;
            let mut prov = ctx.provenance();
            prov.input("stream", input)?;
            report.provenance = prov.to_map();
            for name in ["gamma_fast", "gamma_slow"] {
                let e = report.param(name).expect("lifetime parameter");
                writeln!(stdout, "{name} = {:.4} ± {:.4} ns^-1", e.value, e.error)?;
            }
            if let Some(a) = report.derived("alpha_upper") {
                writeln!(stdout, "alpha <= {:.4} ± {:.4}", a.value, a.error)?;
            }
            write_text(&ctx.output(out, None)?, &report.to_json())
        }
        Command::Efficiency(args) => cmd_efficiency(&ctx, args, stdout),
        Command::Cavity {
            source,
            span,
            points,
            out,
        } => {
            let coupling = match (&source.config, &source.bundled) {
                (None, None) => CavityCoupling::default(),
                _ => load(source)?.cavity,
            };
            cmd_cavity(&ctx, &coupling, *span, *points, out, stdout)
        }
        Command::Reproduce { reduce } => reproduce::run(*reduce, stdout),
    }
}

fn required(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::invalid(flag, "required when no configuration is given"))
}

fn load(source: &ConfigSource) -> Result<RunConfig> {
    match (&source.config, &source.bundled) {
        (Some(path), _) => RunConfig::from_path(path),
        (None, Some(name)) => RunConfig::bundled(name),
        (None, None) => Err(Error::invalid(
            "--config",
            "one of --config or --bundled is required",
        )),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Writes `value` as pretty JSON with a `provenance` object added.
fn write_json<T: Serialize>(path: &Path, value: &T, prov: &Provenance) -> Result<()> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        obj.insert("provenance".into(), json!(prov.to_map()));
    }
    let text = serde_json::to_string_pretty(&v).expect("json value serialises");
    write_text(path, &(text + "\n"))
}

fn read_histogram(path: &Path) -> Result<Histogram> {
    Histogram::read_csv(File::open(path)?)
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_simulate(ctx: &Ctx, cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let sim = cfg.sim_config();
    let stream = simulate(&sim)?;
    let stem = ctx.output(out, cfg.simulation.output_dir.as_deref())?;
    let fmt = cfg.simulation.stream_format;
    let mut written = Vec::new();
    if matches!(fmt, StreamOutput::Binary | StreamOutput::Both) {
        let p = with_extension(&stem, "bin");
        write_binary(&stream, File::create(&p)?)?;
        written.push(p);
    }
    if matches!(fmt, StreamOutput::Csv | StreamOutput::Both) {
        let p = with_extension(&stem, "csv");
        write_csv(&stream, File::create(&p)?)?;
        written.push(p);
    }
    let mut prov = ctx.provenance();
    prov.push("config_digest", sim.digest())
        .push("rng_seed", sim.rng_seed)
        .push("n_periods", sim.n_periods);
    let config_toml = toml::to_string(cfg).map_err(|e| Error::Format(e.to_string()))?;
    let sidecar = json!({
        "records": stream.len(),
        "duration_ps": stream.duration_ps,
        "pulse_offset_ns": sim.pulse_offset(),
        "files": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "config_toml": config_toml,
    });
    write_json(&with_extension(&stem, "provenance.json"), &sidecar, &prov)?;
    let seconds = stream.duration_ps as f64 * 1e-12;
    writeln!(
        stdout,
        "{} records over {:.6} s ({:.1} kHz); pulse offset {} ns",
        stream.len(),
        seconds,
        stream.len() as f64 / seconds / 1e3,
        sim.pulse_offset()
    )?;
    for p in &written {
        writeln!(stdout, "wrote {}", p.display())?;
    }
    Ok(())
}

fn cmd_correlate(
    ctx: &Ctx,
    input: &Path,
    bin_width_ps: u64,
    window: f64,
    slices: usize,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<()> {
    ensure(
        window > 0.0 && window.is_finite(),
        "--window",
        "must be finite and > 0",
    )?;
    ensure(bin_width_ps >= 1, "--bin-width-ps", "must be >= 1")?;
    let stream = read_stream(input)?;
    let window_ps = ((window * 1e3 / bin_width_ps as f64).ceil() as u64) * bin_width_ps;
    let hist = if slices > 1 {
        correlate_sliced(&stream, bin_width_ps, window_ps, slices)?
    } else {
        correlate(&stream, bin_width_ps, window_ps)?
    };
    let mut prov = ctx.provenance();
    prov.input("stream", input)?;
    let path = ctx.output(out, None)?;
    hist.write_csv(File::create(&path)?, prov.entries())?;
    writeln!(
        stdout,
        "{} pairs in {} bins; wrote {}",
        hist.total_pairs,
        hist.len(),
        path.display()
    )?;
    Ok(())
}

fn cmd_g2(
    ctx: &Ctx,
    hist_path: &Path,
    rep_period: f64,
    center_window: f64,
    norm_span: f64,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<()> {
    let hist = read_histogram(hist_path)?;
    let g2 = g2_zero(&hist, rep_period, center_window, norm_span)?;
    let mut prov = ctx.provenance();
    prov.input("histogram", hist_path)?;
    writeln!(
        stdout,
        "g2(0) = {:.4} ± {:.4} ({} centre counts, {} side peaks of mean {:.1})",
        g2.value, g2.error, g2.center_counts, g2.side_peaks, g2.side_mean
    )?;
    write_json(&ctx.output(out, None)?, &g2, &prov)
}

fn cmd_fit_hom(
    ctx: &Ctx,
    hist_path: &Path,
    opts: &HomFitOptions,
    out: &Path,
    curve: &Path,
    stdout: &mut dyn Write,
) -> Result<()> {
    let hist = read_histogram(hist_path)?;
    let mut fit = fit_hom(&hist, opts)?;
    let mut prov = ctx.provenance();
    prov.input("histogram", hist_path)?;
    fit.report.provenance = prov.to_map();
    let r = &fit.report;
    for name in ["amplitude", "gamma_dp"] {
        let e = r.param(name).expect("hom parameter");
        writeln!(stdout, "{name} = {:.5} ± {:.5}", e.value, e.error)?;
    }
    for name in [
        "visibility",
        "t2_star",
        "t2",
        "decoherence_energy_uev",
        "dephasing_energy_uev",
    ] {
        let e = r.derived(name).expect("hom derived value");
        writeln!(stdout, "{name} = {:.4} ± {:.4}", e.value, e.error)?;
    }
    writeln!(stdout, "chi2/dof = {:.3}", r.chi2_per_dof)?;
    write_text(&ctx.output(out, None)?, &r.to_json())?;
    let cpath = ctx.output(curve, None)?;
    fit.curve.write_csv(File::create(cpath)?, prov.entries())
}

fn read_power_series(path: &Path) -> Result<Vec<SaturationPoint>> {
    let mut points = Vec::new();
    let mut header_seen = false;
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != "power,counts,error" {
                return Err(Error::Format(format!(
                    "line {}: expected header `power,counts,error`",
                    i + 1
                )));
            }
            header_seen = true;
            continue;
        }
        let bad = || {
            Error::Format(format!(
                "line {}: expected three numbers, got `{line}`",
                i + 1
            ))
        };
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(bad());
        }
        points.push(SaturationPoint::from((v[0], v[1], v[2])));
    }
    Ok(points)
}

fn cmd_fit_sat(
    ctx: &Ctx,
    input: &Path,
    out: &Path,
    curve: &Path,
    stdout: &mut dyn Write,
) -> Result<()> {
    let points = read_power_series(input)?;
    let mut report = fit_saturation(&points)?;
    let mut prov = ctx.provenance();
    prov.input("series", input)?;
    report.provenance = prov.to_map();
    let c = report.param("c_sat").expect("c_sat");
    let p = report.param("p_sat").expect("p_sat");
    writeln!(stdout, "c_sat = {:.6e} ± {:.3e}", c.value, c.error)?;
    writeln!(stdout, "p_sat = {:.6e} ± {:.3e}", p.value, p.error)?;
    writeln!(stdout, "chi2/dof = {:.3}", report.chi2_per_dof)?;
    write_text(&ctx.output(out, None)?, &report.to_json())?;
    let mut w = BufWriter::new(File::create(ctx.output(curve, None)?)?);
    for (k, v) in prov.entries() {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "power,counts,error,model")?;
    for pt in &points {
        let m = saturation_curve(pt.power, p.value, c.value)?;
        writeln!(w, "{},{},{},{}", pt.power, pt.counts, pt.error, m)?;
    }
    w.flush()?;
    Ok(())
}

fn measured(value: Option<f64>, error: f64, flag: &str) -> Result<Measured> {
    let v = value.ok_or_else(|| Error::invalid(flag, "required by this method"))?;
    Ok(Measured::new(v, error))
}

fn cmd_efficiency(ctx: &Ctx, a: &EfficiencyArgs, stdout: &mut dyn Write) -> Result<()> {
    let prop = match a.monte_carlo {
        Some(samples) => Propagation::MonteCarlo {
            samples,
            seed: a.seed,
        },
        None => Propagation::Linear,
    };
    let mut report = EfficiencyReport::new();
    match a.method {
        EfficiencyMethod::Relative => {
            let e = eta_relative(
                measured(a.csat_qd, a.csat_qd_err, "--csat-qd")?,
                measured(a.csat_bulk, a.csat_bulk_err, "--csat-bulk")?,
                measured(a.eta_bulk, a.eta_bulk_err, "--eta-bulk")?,
                prop,
            )?;
            report = report.with_estimate(&e);
        }
        EfficiencyMethod::Absolute => {
            let e = eta_absolute(
                measured(a.csat, a.csat_err, "--csat")?,
                measured(a.eta_setup, a.eta_setup_err, "--eta-setup")?,
                required(a.rep_rate, "--rep-rate")?,
                Measured::exact(a.alpha_eps),
                prop,
            )?;
            report = report.with_estimate(&e);
        }
        EfficiencyMethod::Bounds => {
            let c = measured(a.csat, a.csat_err, "--csat")?;
            let setup = measured(a.eta_setup, a.eta_setup_err, "--eta-setup")?;
            let rep = required(a.rep_rate, "--rep-rate")?;
            let alpha = match (a.alpha_max, a.i_slow_over_i_fast) {
                (Some(v), _) => v,
                (None, Some(r)) => alpha_upper_bound(r, 1.0)?,
                (None, None) => {
                    return Err(Error::invalid(
                        "--alpha-max",
                        "bounds need --alpha-max or --i-slow-over-i-fast",
                    ))
                }
            };
            let prep = preparation_bounds_with_qe_ratio(
                required(a.ix2_over_ix, "--ix2-over-ix")?,
                measured(a.gamma_fast, a.gamma_fast_err, "--gamma-fast")?,
                measured(a.gamma_nrad, a.gamma_nrad_err, "--gamma-nrad")?,
                a.qe_ratio,
                prop,
            )?;
            let scale = |m: Measured| Measured::new(alpha * m.value, alpha * m.error);
            let bounds = eta_absolute_bounds(
                c,
                setup,
                rep,
                Interval {
                    lower: scale(prep.epsilon.lower),
                    upper: scale(prep.epsilon.upper),
                },
                prop,
            )?;
            let point = eta_absolute(c, setup, rep, Measured::exact(1.0), prop)?;
            report = report
                .with_estimate(&point)
                .with_preparation(&prep)
                .with_bounds(&bounds);
            report.alpha_upper = Some(alpha);
        }
    }
    report.provenance = ctx.provenance().to_map();
    if let Some(e) = report.eta_x {
        writeln!(
            stdout,
            "eta_X = {:.2}% ± {:.2}%",
            100.0 * e.value,
            100.0 * e.error
        )?;
    }
    if let Some(q) = report.eta_qe {
        writeln!(
            stdout,
            "eta_QE = {:.2}% ± {:.2}%",
            100.0 * q.value,
            100.0 * q.error
        )?;
    }
    if let Some(eps) = report.epsilon_bounds {
        writeln!(
            stdout,
            "({:.1} ± {:.1})% <= eps_X <= ({:.1} ± {:.1})%",
            100.0 * eps.lower.value,
            100.0 * eps.lower.error,
            100.0 * eps.upper.value,
            100.0 * eps.upper.error
        )?;
    }
    if let Some(b) = report.eta_x_bounds {
        writeln!(
            stdout,
            "({:.1} ± {:.1})% <= eta_X <= ({:.1} ± {:.1})%",
            100.0 * b.lower.value,
            100.0 * b.lower.error,
            100.0 * b.upper.value,
            100.0 * b.upper.error
        )?;
    }
    if let Some(s) = &report.assumption {
        writeln!(stdout, "assumption: {s}")?;
    }
    write_text(&ctx.output(&a.out, None)?, &(report.to_json() + "\n"))
}

fn cmd_cavity(
    ctx: &Ctx,
    coupling: &CavityCoupling,
    span: f64,
    points: usize,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<()> {
    ensure(
        span > 0.0 && span.is_finite(),
        "--span",
        "must be finite and > 0",
    )?;
    ensure(points >= 2, "--points", "must be >= 2")?;
    let prov = ctx.provenance();
    let path = ctx.output(out, None)?;
    let mut w = BufWriter::new(File::create(&path)?);
    for (k, v) in prov.entries() {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "detuning_nm,beta,eta_x,purcell,gamma_cav,gamma_tot")?;
    for i in 0..points {
        let d = -span + 2.0 * span * i as f64 / (points - 1) as f64;
        let r = beta_and_efficiency(d, coupling)?;
        writeln!(
            w,
            "{d},{},{},{},{},{}",
            r.beta, r.eta_x, r.purcell, r.gamma_cav, r.gamma_tot
        )?;
    }
    w.flush()?;
    let peak = beta_and_efficiency(0.0, coupling)?;
    writeln!(
        stdout,
        "on resonance: beta = {:.4}, eta_X = {:.4}, F_p = {:.3}; linewidth {:.3} nm; wrote {}",
        peak.beta,
        peak.eta_x,
        peak.purcell,
        coupling.linewidth(),
        path.display()
    )?;
    Ok(())
}
