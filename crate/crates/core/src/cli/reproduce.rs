use std::io::Write;

use crate::config::RunConfig;
use crate::correlator::{correlate, g2_zero};
use crate::efficiency::{
    alpha_upper_bound, eta_absolute, eta_absolute_bounds, eta_relative, preparation_bounds,
    Interval, Measured, Propagation,
};
use crate::error::Result;
use crate::inference::{fit_hom, fit_lifetime, phase_histogram};
use crate::simulator::simulate;

/// Reference emitter used for the relative efficiency.
const C_SAT_BULK: Measured = Measured {
    value: 5.22e3,
    error: 0.10e3,
};
const ETA_BULK: f64 = 0.0079;
const ETA_SETUP_QD2: Measured = Measured {
    value: 0.12,
    error: 0.014,
};
const REP_RATE_QD2: f64 = 80e6;

/// A row passes when it agrees within this many combined standard errors.
const PASS_SIGMAS: f64 = 2.0;

struct Row {
    label: String,
    value: Measured,
    reference: Measured,
}

impl Row {
    fn new(label: impl Into<String>, value: Measured, reference: (f64, f64)) -> Self {
        Self {
            label: label.into(),
            value,
            reference: Measured::new(reference.0, reference.1),
        }
    }

    fn passes(&self) -> bool {
        let tol = PASS_SIGMAS * self.value.error.hypot(self.reference.error);
        (self.value.value - self.reference.value).abs() <= tol
    }
}

fn scaled(m: Measured, k: f64) -> Measured {
    Measured::new(k * m.value, k * m.error)
}

fn load(name: &str, reduce: u64) -> Result<RunConfig> {
    let mut cfg = RunConfig::bundled(name)?;
    cfg.simulation.n_periods = (cfg.simulation.n_periods / reduce.max(1)).max(1);
    Ok(cfg)
}

/// Saturated count rates and g²(0) of a bundled HBT configuration.
struct HbtResult {
    total: Measured,
    signal: Measured,
    g2: Measured,
    /// Mixing bound from a lifetime fit of the arrival phases.
    alpha: Option<Measured>,
}

fn hbt(name: &str, reduce: u64) -> Result<HbtResult> {
    let cfg = load(name, reduce)?;
    let stream = simulate(&cfg.sim_config())?;
    let seconds = stream.duration_ps as f64 * 1e-12;
    let hist = correlate(&stream, cfg.fit.bin_width_ps, cfg.window_ps())?;
    let g = g2_zero(
        &hist,
        cfg.schedule.rep_period,
        cfg.fit.g2_center_window,
        cfg.fit.g2_norm_span,
    )?;
    let sat = cfg.schedule.excitation_probability();
    let n = stream.len() as f64;
    let total = Measured::new(n / seconds / sat, n.sqrt() / seconds / sat);
    // other lines contribute g2(0)/2 of the detected signal
    let signal = Measured::new(
        total.value * (1.0 - g.value / 2.0),
        (total.error * (1.0 - g.value / 2.0)).hypot(total.value * g.error / 2.0),
    );
    let alpha = match cfg.fit.detector_irf_sigma {
        Some(_) => {
            let sim = cfg.sim_config();
            let phase = phase_histogram(&stream, cfg.schedule.rep_period, sim.pulse_offset(), 50)?;
            let a = fit_lifetime(&phase, &cfg.lifetime_options()?)?
                .derived("alpha_upper")
                .expect("lifetime derived value");
            Some(Measured::new(a.value, a.error))
        }
        None => None,
    };
    Ok(HbtResult {
        total,
        signal,
        g2: Measured::new(g.value, g.error),
        alpha,
    })
}

fn hom(name: &str, reduce: u64) -> Result<[Measured; 4]> {
    let cfg = load(name, reduce)?;
    let stream = simulate(&cfg.sim_config())?;
    let hist = correlate(&stream, cfg.fit.bin_width_ps, cfg.window_ps())?;
    let fit = fit_hom(&hist, &cfg.hom_fit_options()?)?;
    let d = |k: &str| {
        let e = fit.report.derived(k).expect("hom derived value");
        Measured::new(e.value, e.error)
    };
    Ok([d("t1"), d("t2_star"), d("t2"), d("visibility")])
}

fn print_rows(out: &mut dyn Write, title: &str, rows: &[Row]) -> Result<usize> {
    writeln!(out, "{title}")?;
    writeln!(
        out,
        "  {:<28} {:>22} {:>22}  result",
        "quantity", "this run", "reference"
    )?;
    let mut passed = 0;
    for r in rows {
        let ok = r.passes();
        passed += ok as usize;
        writeln!(
            out,
            "  {:<28} {:>22} {:>22}  {}",
            r.label,
            format!("{:.4} ± {:.4}", r.value.value, r.value.error),
            format!("{:.4} ± {:.4}", r.reference.value, r.reference.error),
            if ok { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(passed)
}

pub(super) fn run(reduce: u64, out: &mut dyn Write) -> Result<()> {
    let lin = Propagation::Linear;
    let qd1 = hbt("qd1_hbt", reduce)?;
    let qd2 = hbt("qd2_hbt", reduce)?;
    let eta1 = eta_relative(qd1.signal, C_SAT_BULK, Measured::exact(ETA_BULK), lin)?.eta;
    let eta2 = eta_absolute(
        qd2.signal,
        ETA_SETUP_QD2,
        REP_RATE_QD2,
        Measured::exact(1.0),
        lin,
    )?
    .eta;
    let table1 = vec![
        Row::new(
            "QD1 C_sat X-line (kHz)",
            scaled(qd1.signal, 1e-3),
            (293.0, 8.6),
        ),
        Row::new("QD1 g2(0) (%)", scaled(qd1.g2, 100.0), (4.0, 5.0)),
        Row::new("QD1 eta_X (%)", scaled(eta1, 100.0), (44.3, 2.1)),
        Row::new(
            "QD1 alpha_X upper (decay fit)",
            qd1.alpha.unwrap_or(Measured::exact(f64::NAN)),
            (1.092, 0.0),
        ),
        Row::new("QD2 C_sat (kHz)", scaled(qd2.total, 1e-3), (962.0, 46.0)),
        Row::new("QD2 g2(0) (%)", scaled(qd2.g2, 100.0), (50.0, 1.0)),
        Row::new("QD2 eta_X (%)", scaled(eta2, 100.0), (15.1, 2.0)),
    ];

    let prep = preparation_bounds(0.52, Measured::exact(0.62), Measured::new(0.06, 0.05), lin)?;
    let alpha = alpha_upper_bound(0.092, 1.0)?;
    let bounds = eta_absolute_bounds(
        Measured::new(722e3, 722e3 * 46.0 / 962.0),
        ETA_SETUP_QD2,
        REP_RATE_QD2,
        Interval {
            lower: scaled(prep.epsilon.lower, alpha),
            upper: scaled(prep.epsilon.upper, alpha),
        },
        lin,
    )?;
    let efficiency = vec![
        Row::new("eta_QE (%)", scaled(prep.eta_qe, 100.0), (90.0, 8.0)),
        Row::new(
            "eps_X lower (%)",
            scaled(prep.epsilon.lower, 100.0),
            (59.0, 5.0),
        ),
        Row::new(
            "eps_X upper (%)",
            scaled(prep.epsilon.upper, 100.0),
            (72.0, 6.0),
        ),
        Row::new("alpha_X upper", Measured::exact(alpha), (1.092, 0.0)),
        Row::new(
            "QD2 eta_X lower (%)",
            scaled(bounds.lower.eta, 100.0),
            (19.2, 3.0),
        ),
        Row::new(
            "QD2 eta_X upper (%)",
            scaled(bounds.upper.eta, 100.0),
            (23.4, 3.7),
        ),
    ];

    let lo = hom("hom_lo", reduce)?;
    let la = hom("hom_la", reduce)?;
    let mut table2 = Vec::new();
    for (tag, v, refs) in [
        (
            "LO",
            lo,
            [(1.61, 0.0), (0.49, 0.09), (0.43, 0.07), (0.13, 0.02)],
        ),
        (
            "LA",
            la,
            [(1.61, 0.0), (0.77, 0.19), (0.63, 0.13), (0.19, 0.04)],
        ),
    ] {
        for ((name, m), r) in ["T1 (ns)", "T2* (ns)", "T2 (ns)", "V"]
            .iter()
            .zip(v)
            .zip(refs)
        {
            table2.push(Row::new(format!("{tag} {name}"), m, r));
        }
    }

    let mut passed = 0;
    passed += print_rows(
        out,
        "Figures of merit (simulated bundled HBT runs)",
        &table1,
    )?;
    writeln!(out)?;
    passed += print_rows(out, "Efficiency bounds (published inputs)", &efficiency)?;
    writeln!(out)?;
    passed += print_rows(out, "Coherence (simulated bundled HOM runs)", &table2)?;
    let total = table1.len() + efficiency.len() + table2.len();
    writeln!(out)?;
    writeln!(
        out,
        "{passed}/{total} rows within {PASS_SIGMAS} combined standard errors"
    )?;
    Ok(())
}
