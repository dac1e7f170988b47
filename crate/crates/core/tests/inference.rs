use photonlab::config::RunConfig;
use photonlab::correlator::{correlate, Histogram};
use photonlab::inference::{
    area_visibility, fit_hom, fit_lifetime, fit_saturation, hom_expected_counts, phase_histogram,
    HomFit, LifetimeOptions, SaturationPoint,
};
use photonlab::model::{
    hom_model, saturation_curve, visibility, DetectionChain, EmitterSpec, ExcitationSchedule,
    HomModelParams,
};
use photonlab::simulator::{simulate, InterferenceSampler, Mode, SimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

fn within(value: f64, expect: f64, error: f64, k: f64) -> bool {
    (value - expect).abs() <= k * error
}

fn hom_run(name: &str, edit: impl FnOnce(&mut RunConfig)) -> (RunConfig, Histogram, HomFit) {
    let mut cfg = RunConfig::bundled(name).unwrap();
    edit(&mut cfg);
    let hist = correlate(
        &simulate(&cfg.sim_config()).unwrap(),
        cfg.fit.bin_width_ps,
        cfg.window_ps(),
    )
    .unwrap();
    let fit = fit_hom(&hist, &cfg.hom_fit_options().unwrap()).unwrap();
    (cfg, hist, fit)
}

fn noiseless(c_sat: f64, p_sat: f64) -> Vec<SaturationPoint> {
    [0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0]
        .iter()
        .map(|&x| {
            let p = x * p_sat;
            let c = saturation_curve(p, p_sat, c_sat).unwrap();
            SaturationPoint::from((p, c, c.sqrt()))
        })
        .collect()
}

#[test]
fn saturation_recovers_published_parameters_exactly() {
    let r = fit_saturation(&noiseless(2.93e5, 46.7)).unwrap();
    assert!((r.param("c_sat").unwrap().value / 2.93e5 - 1.0).abs() < 1e-8);
    assert!((r.param("p_sat").unwrap().value / 46.7 - 1.0).abs() < 1e-8);
}

#[test]
fn bulk_reference_ratio() {
    let qd = fit_saturation(&noiseless(2.93e5, 46.7))
        .unwrap()
        .param("c_sat")
        .unwrap()
        .value;
    let bulk = fit_saturation(&noiseless(5.22e3, 126.7))
        .unwrap()
        .param("c_sat")
        .unwrap()
        .value;
    assert_eq!(format!("{:.1}", qd / bulk), "56.1");
}

#[test]
fn saturation_two_sigma_coverage() {
    let (c_sat, p_sat): (f64, f64) = (2.93e5, 46.7);
    let powers = [
        5.0, 10.0, 20.0, 30.0, 45.0, 60.0, 80.0, 110.0, 150.0, 200.0, 280.0, 400.0,
    ];
    let mut hits = 0;
    for trial in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let pts: Vec<SaturationPoint> = powers
            .iter()
            .map(|&p| {
                let n: f64 = Poisson::new(c_sat * (1.0 - (-p / p_sat).exp()))
                    .unwrap()
                    .sample(&mut rng);
                SaturationPoint::from((p, n, n.sqrt()))
            })
            .collect();
        let r = fit_saturation(&pts).unwrap();
        let c = r.param("c_sat").unwrap();
        let p = r.param("p_sat").unwrap();
        hits +=
            (within(c.value, c_sat, c.error, 2.0) && within(p.value, p_sat, p.error, 2.0)) as usize;
    }
    // both parameters inside 2σ; independent errors would give 0.911
    assert!(hits as f64 / 200.0 >= 0.88, "{hits}/200");
}

#[test]
fn hom_lo_and_la_energies() {
    let (_, _, lo) = hom_run("hom_lo", |_| {});
    let e = lo.report.derived("decoherence_energy_uev").unwrap();
    assert!(within(e.value, 1.53, e.error.hypot(0.25), 2.0), "{e:?}");
    let v = lo.report.derived("visibility").unwrap();
    assert!(within(v.value, 0.13, 0.02, 1.0), "{v:?}");

    let (_, _, la) = hom_run("hom_la", |_| {});
    let e = la.report.derived("dephasing_energy_uev").unwrap();
    assert!(within(e.value, 0.85, e.error.hypot(0.21), 2.0), "{e:?}");
    let v = la.report.derived("visibility").unwrap();
    assert!(within(v.value, 0.19, 0.04, 1.0), "{v:?}");
}

#[test]
fn no_dephasing_gives_unit_visibility_and_a_suppressed_centre() {
    let (cfg, hist, fit) = hom_run("hom_lo", |c| c.emitter.gamma_dp = 0.0);
    let v = fit.report.derived("visibility").unwrap();
    assert!(within(v.value, 1.0, v.error, 2.0), "{v:?}");
    let (_, far, _) = hom_run("hom_lo", |c| c.emitter.gamma_dp = f64::INFINITY);
    let centre: Vec<usize> = (0..hist.len())
        .filter(|&k| hist.bin_center_ns(k).abs() < 0.5)
        .collect();
    let sum = |v: &dyn Fn(usize) -> f64| centre.iter().map(|&k| v(k)).sum::<f64>();
    // what is left near zero delay is the tails of the peaks at ±δ
    let a = fit.report.param("amplitude").unwrap().value;
    let expected = hom_expected_counts(&hist, &cfg.hom_fit_options().unwrap(), a, 0.0).unwrap();
    let (seen, model) = (sum(&|k| hist.counts[k] as f64), sum(&|k| expected[k]));
    assert!(
        (seen - model).abs() < 3.0 * model.sqrt(),
        "{seen} vs model {model}"
    );
    let distinct = sum(&|k| far.counts[k] as f64);
    assert!(seen < 0.5 * distinct, "{seen} vs {distinct}");
}

#[test]
fn fitted_visibility_decreases_with_dephasing() {
    let mut last = f64::INFINITY;
    for (i, g) in [0.3, 0.8, 2.0, 5.0].into_iter().enumerate() {
        let (cfg, _, fit) = hom_run("hom_lo", |c| {
            c.emitter.gamma_dp = g;
            c.simulation.rng_seed = 40 + i as u64;
        });
        let v = fit.report.derived("visibility").unwrap();
        let truth = visibility(cfg.emitter.gamma_fast, g).unwrap();
        assert!(
            within(v.value, truth, v.error, 3.0),
            "γ_dp {g}: {v:?} vs {truth}"
        );
        assert!(v.value < last, "γ_dp {g}: {} !< {last}", v.value);
        last = v.value;
    }
}

#[test]
fn interference_samplers_agree() {
    let (_, _, a) = hom_run("hom_la", |c| {
        c.simulation.sampler = InterferenceSampler::Bernoulli
    });
    let (_, _, b) = hom_run("hom_la", |c| {
        c.simulation.sampler = InterferenceSampler::PhaseDiffusion;
        c.simulation.rng_seed += 1;
    });
    let ga = a.report.param("gamma_dp").unwrap();
    let gb = b.report.param("gamma_dp").unwrap();
    assert!(
        within(ga.value, gb.value, ga.error.hypot(gb.error), 2.0),
        "{ga:?} vs {gb:?}"
    );
}

#[test]
fn central_residuals_are_white() {
    let (cfg, _, fit) = hom_run("hom_lo", |_| {});
    let half = cfg.schedule.rep_period / 2.0;
    let r: Vec<f64> = fit
        .curve
        .tau_ns
        .iter()
        .zip(&fit.curve.residuals)
        .filter(|(t, _)| t.abs() <= half)
        .map(|(_, &r)| r)
        .collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    for lag in 1..=3 {
        let c = r
            .windows(lag + 1)
            .map(|w| (w[0] - mean) * (w[lag] - mean))
            .sum::<f64>()
            / (n * var);
        assert!(c.abs() < 2.0 / n.sqrt(), "lag {lag}: {c}");
    }
}

#[test]
fn bootstrap_spread_matches_reported_errors() {
    let (cfg, hist, fit) = hom_run("hom_la", |_| {});
    let opts = cfg.hom_fit_options().unwrap();
    let a = fit.report.param("amplitude").unwrap().value;
    let g = fit.report.param("gamma_dp").unwrap().value;
    let expected = hom_expected_counts(&hist, &opts, a, g).unwrap();
    let (mut values, mut errors) = (Vec::new(), Vec::new());
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let mut h = hist.clone();
        for (c, &m) in h.counts.iter_mut().zip(&expected) {
            *c = if m > 0.0 {
                Poisson::new(m).unwrap().sample(&mut rng) as u64
            } else {
                0
            };
        }
        let r = fit_hom(&h, &opts).unwrap().report;
        let p = [r.param("amplitude").unwrap(), r.param("gamma_dp").unwrap()];
        values.push([p[0].value, p[1].value]);
        errors.push([p[0].error, p[1].error]);
    }
    for j in 0..2 {
        let m = values.iter().map(|v| v[j]).sum::<f64>() / 100.0;
        let sd = (values.iter().map(|v| (v[j] - m).powi(2)).sum::<f64>() / 99.0).sqrt();
        let reported = errors.iter().map(|e| e[j]).sum::<f64>() / 100.0;
        assert!(
            (sd / reported - 1.0).abs() < 0.3,
            "parameter {j}: bootstrap {sd} vs covariance {reported}"
        );
    }
}

#[test]
fn area_visibility_for_well_separated_peaks() {
    let (gamma, gamma_dp, delta) = (1.0, 0.4, 10.0);
    let params = HomModelParams {
        gamma,
        gamma_dp,
        amplitude: 1.0,
        delta,
        rep_period: 60.0,
        irf_sigma: 0.0,
        beating: None,
    };
    let mut h = Histogram::zeros(10, -20_000, 20_000).unwrap();
    for k in 0..h.len() {
        // midpoint rule on ten sub-cells per bin
        let lo = h.bin_center_ns(k) - 0.005;
        let dens: f64 = (0..10)
            .map(|j| hom_model(lo + 0.001 * (j as f64 + 0.5), &params))
            .sum::<f64>()
            / 10.0;
        h.counts[k] = (dens * 1e9).round() as u64;
    }
    let truth = visibility(gamma, gamma_dp).unwrap();
    // a window of δ takes in each peak whole once they are well separated
    let v = area_visibility(&h, delta, delta).unwrap().visibility;
    assert!((v - truth).abs() < 1e-3, "{v} vs {truth}");
}

#[test]
fn lifetime_fit_recovers_rates_and_mixing_bound() {
    let ratio = 0.092;
    let emitter = EmitterSpec {
        gamma_fast: 0.62,
        gamma_slow: 0.24,
        slow_fraction: ratio / (1.0 + ratio),
        ..EmitterSpec::default()
    };
    let chain = DetectionChain {
        eta_first_lens: 0.5,
        irf_sigma: 0.1,
        ..DetectionChain::default()
    };
    let cfg = SimConfig::new(
        emitter,
        ExcitationSchedule::hbt(1e3 / 76.0, 2.0),
        chain,
        Mode::Hbt,
        1_000_000,
        3,
    );
    let stream = simulate(&cfg).unwrap();
    let phase = phase_histogram(&stream, cfg.schedule.rep_period, cfg.pulse_offset(), 50).unwrap();
    let r = fit_lifetime(&phase, &LifetimeOptions::new(cfg.schedule.rep_period, 0.1)).unwrap();
    for (name, truth) in [("gamma_fast", 0.62), ("gamma_slow", 0.24)] {
        let e = r.param(name).unwrap();
        assert!(within(e.value, truth, e.error, 3.0), "{name}: {e:?}");
    }
    let a = r.derived("alpha_upper").unwrap();
    assert!(within(a.value, 1.0 + ratio, a.error, 3.0), "{a:?}");
    assert!(r.chi2_per_dof < 1.3, "{}", r.chi2_per_dof);
}
