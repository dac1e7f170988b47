use photonlab::config::RunConfig;
use photonlab::correlator::{correlate, g2_zero, peak_amplitude_scan};
use photonlab::inference::{
    area_visibility, fit_hom, fit_saturation, hom_expected_counts, SaturationPoint,
};
use photonlab::model::{
    visibility, BackgroundStatistics, DetectionChain, EmitterSpec, ExcitationSchedule,
};
use photonlab::simulator::{simulate, Mode, SimConfig, TimeTagStream};

const REP: f64 = 1e3 / 76.0;

fn hbt(
    emitter: EmitterSpec,
    chain: DetectionChain,
    power: f64,
    periods: u64,
    seed: u64,
) -> SimConfig {
    SimConfig::new(
        emitter,
        ExcitationSchedule::hbt(REP, power),
        chain,
        Mode::Hbt,
        periods,
        seed,
    )
}

fn chain(eta: f64) -> DetectionChain {
    DetectionChain {
        eta_first_lens: eta,
        irf_sigma: 0.05,
        ..DetectionChain::default()
    }
}

/// Asymptotic Kolmogorov survival function `Q(λ) = 2Σ(−1)^{k−1}e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut q = 0.0;
    for k in 1..100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        q += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * q).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov p-value.
fn ks_p_value(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    kolmogorov_q((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d)
}

fn phases(stream: &TimeTagStream, cfg: &SimConfig) -> Vec<f64> {
    let t = cfg.schedule.rep_period * 1e3;
    let offset = cfg.pulse_offset() * 1e3;
    stream
        .records()
        .iter()
        .map(|r| (r.timestamp_ps as f64 - offset + t / 2.0).rem_euclid(t))
        .collect()
}

fn rate_hz(stream: &TimeTagStream) -> f64 {
    stream.len() as f64 / (stream.duration_ps as f64 * 1e-12)
}

#[test]
fn thinning_stages_compose() {
    let e = EmitterSpec {
        slow_fraction: 0.1,
        ..EmitterSpec::default()
    };
    let single = hbt(
        e.clone(),
        DetectionChain {
            eta_setup: 0.3 * 0.4,
            ..chain(0.5)
        },
        2.0,
        400_000,
        3,
    );
    let split = hbt(
        e,
        DetectionChain {
            eta_setup: 0.3,
            extra_transmissions: vec![0.4],
            ..chain(0.5)
        },
        2.0,
        400_000,
        4,
    );
    let a = simulate(&single).unwrap();
    let b = simulate(&split).unwrap();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    assert!((na - nb).abs() < 4.0 * (na + nb).sqrt(), "{na} vs {nb}");
    let p = ks_p_value(phases(&a, &single), phases(&b, &split));
    assert!(p > 1e-3, "arrival-phase KS p = {p}");
}

#[test]
fn ks_detects_a_different_lifetime() {
    let fast = hbt(EmitterSpec::default(), chain(0.5), 2.0, 100_000, 5);
    let slow = hbt(
        EmitterSpec {
            gamma_fast: 0.4,
            ..EmitterSpec::default()
        },
        chain(0.5),
        2.0,
        100_000,
        6,
    );
    let p = ks_p_value(
        phases(&simulate(&fast).unwrap(), &fast),
        phases(&simulate(&slow).unwrap(), &slow),
    );
    assert!(p < 1e-6, "{p}");
}

#[test]
fn single_emitter_centre_window_holds_only_neighbour_tails() {
    let cfg = hbt(EmitterSpec::default(), chain(0.5), 3.0, 2_000_000, 7);
    let hist = correlate(&simulate(&cfg).unwrap(), 100, 200_000).unwrap();
    let g = g2_zero(&hist, REP, 2.0, 300.0).unwrap();
    // side peaks are two-sided exponentials (γ/2)e^{−γ|τ−T|}; a ±1 ns window
    // holds 1 − e^{−γ} of each, and the centre window catches both ±T tails
    let gamma = cfg.emitter.gamma_fast;
    let area = g.side_mean / (1.0 - (-gamma).exp());
    let expect = area * ((-gamma * (REP - 1.0)).exp() - (-gamma * (REP + 1.0)).exp());
    let c = g.center_counts as f64;
    assert!(
        (c - expect).abs() < 3.0 * expect.sqrt() + 1.0,
        "{c} vs {expect}"
    );
}

#[test]
fn poissonian_background_mixes_as_two_b_minus_b_squared() {
    let b = 0.3;
    let c = DetectionChain {
        background_fraction: b,
        background_statistics: BackgroundStatistics::Poissonian,
        ..chain(0.5)
    };
    let cfg = hbt(EmitterSpec::default(), c, 2.1, 1_000_000, 8);
    let hist = correlate(&simulate(&cfg).unwrap(), 100, 200_000).unwrap();
    let g = g2_zero(&hist, REP, 2.0, 300.0).unwrap();
    let expect = 2.0 * b - b * b;
    assert!(
        (g.value - expect).abs() < 3.0 * g.error,
        "{} ± {} vs {expect}",
        g.value,
        g.error
    );
}

#[test]
fn saturated_rate_of_setup_two() {
    let mut cfg = RunConfig::bundled("qd2_hbt").unwrap();
    cfg.simulation.n_periods = 10_000_000;
    let sim = cfg.sim_config();
    let stream = simulate(&sim).unwrap();
    let p = sim.schedule.excitation_probability();
    let c_sat = rate_hz(&stream) / p;
    let err = (stream.len() as f64).sqrt() / (stream.duration_ps as f64 * 1e-12) / p;
    let ch = &sim.chain;
    let expect =
        1e3 / sim.schedule.rep_period * 1e6 * ch.eta_first_lens * ch.eta_setup * ch.alpha_mix
            / 2.0
            / (1.0 - ch.background_fraction);
    assert!(
        (c_sat - expect).abs() < 3.0 * err,
        "{c_sat} ± {err} vs {expect}"
    );
    // published saturated rate 962 ± 46 kHz
    assert!((c_sat - 962e3).abs() < 46e3, "{c_sat}");
}

#[test]
fn blinking_off_gives_poissonian_peak_areas() {
    let cfg = hbt(EmitterSpec::default(), chain(0.3), 2.0, 1_000_000, 9);
    let hist = correlate(&simulate(&cfg).unwrap(), 1_000, 2_000_000).unwrap();
    let s = peak_amplitude_scan(&hist, REP, 0.002).unwrap();
    assert!(s.excess_significance.abs() < 3.0, "{s:?}");
}

/// Mean peak area in each band of `|τ|` (ps) relative to the mean beyond 3 µs.
fn band_ratios(cfg: &SimConfig, bands: &[(f64, f64)]) -> Vec<f64> {
    let hist = correlate(&simulate(cfg).unwrap(), 1_000, 4_000_000).unwrap();
    let s = peak_amplitude_scan(&hist, REP, 0.004).unwrap();
    let mean_in = |keep: &dyn Fn(f64) -> bool| {
        let v: Vec<f64> = (0..s.areas.len())
            .filter(|&i| keep(s.peak_centers[i].abs()))
            .map(|i| s.areas[i])
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let far = mean_in(&|t| t > 3e6);
    bands
        .iter()
        .map(|&(lo, hi)| mean_in(&|t| (lo..hi).contains(&t)) / far)
        .collect()
}

#[test]
fn blinking_follows_telegraph_correlation() {
    let (k_off, k_on) = (0.5, 1.0);
    let e = EmitterSpec {
        blink_off_rate: k_off,
        blink_on_rate: k_on,
        ..EmitterSpec::default()
    };
    let bands = [(0.0, 2e5), (2e5, 6e5), (6e5, 1.2e6), (1.2e6, 2e6)];
    // a single trajectory covers only ~10⁴ correlation times, so the error
    // comes from the spread over independent runs
    let runs: Vec<Vec<f64>> = (0..8)
        .map(|seed| {
            band_ratios(
                &hbt(e.clone(), chain(0.3), 2.0, 500_000, 100 + seed),
                &bands,
            )
        })
        .collect();
    // 1 + (k_off/k_on)·exp(−(k_on + k_off)·τ), τ in µs, averaged over each
    // band and the reference region
    let oracle = |tau_us: f64| 1.0 + k_off / k_on * (-(k_on + k_off) * tau_us).exp();
    let band_mean = |lo: f64, hi: f64| {
        let ks: Vec<f64> = (1..)
            .map(|k| k as f64 * REP * 1e3)
            .skip_while(|&t| t < lo)
            .take_while(|&t| t < hi)
            .collect();
        ks.iter().map(|&t| oracle(t * 1e-6)).sum::<f64>() / ks.len() as f64
    };
    let far = band_mean(3e6, 4e6);
    for (b, &(lo, hi)) in bands.iter().enumerate() {
        let v: Vec<f64> = runs.iter().map(|r| r[b]).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
        let err = sd / (v.len() as f64).sqrt();
        let expect = band_mean(lo, hi) / far;
        assert!(
            (mean - expect).abs() < 4.0 * err,
            "[{lo}, {hi}) ps: {mean} ± {err} vs {expect}"
        );
    }
    let s = peak_amplitude_scan(
        &correlate(
            &simulate(&hbt(e, chain(0.3), 2.0, 500_000, 99)).unwrap(),
            1_000,
            2_000_000,
        )
        .unwrap(),
        REP,
        0.002,
    )
    .unwrap();
    assert!(s.excess_significance > 10.0);
}

#[test]
fn saturation_sweep_recovers_saturation_power() {
    let points: Vec<SaturationPoint> = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0]
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let s = simulate(&hbt(
                EmitterSpec::default(),
                chain(0.5),
                p,
                200_000,
                20 + i as u64,
            ))
            .unwrap();
            let n = s.len() as f64;
            SaturationPoint::from((p, n, n.sqrt()))
        })
        .collect();
    let r = fit_saturation(&points).unwrap();
    let p_sat = r.param("p_sat").unwrap().value;
    assert!((p_sat - 1.0).abs() < 0.05, "{p_sat}");
    let c_sat = r.param("c_sat").unwrap().value;
    assert!((c_sat / (200_000.0 * 0.5) - 1.0).abs() < 0.02, "{c_sat}");
}

#[test]
fn hom_histogram_matches_model_at_injected_dephasing() {
    let cfg = RunConfig::bundled("hom_lo").unwrap();
    let hist = correlate(
        &simulate(&cfg.sim_config()).unwrap(),
        cfg.fit.bin_width_ps,
        cfg.window_ps(),
    )
    .unwrap();
    let opts = cfg.hom_fit_options().unwrap();
    let fit = fit_hom(&hist, &opts).unwrap();
    let a = fit.report.param("amplitude").unwrap().value;
    let expected = hom_expected_counts(&hist, &opts, a, cfg.emitter.gamma_dp).unwrap();
    let half = cfg.schedule.rep_period / 2.0;
    let (mut chi2, mut n) = (0.0, 0);
    for (k, &m) in expected.iter().enumerate() {
        if hist.bin_center_ns(k).abs() <= half && m > 0.0 {
            chi2 += (hist.counts[k] as f64 - m).powi(2) / m;
            n += 1;
        }
    }
    assert!(chi2 / (n as f64) < 1.5, "chi2/n = {}", chi2 / n as f64);

    // whole-peak windows: the area estimator on data agrees with the same
    // estimator on the model, and overlap pulls both below the true V
    let window = 3.0;
    let area = area_visibility(&hist, cfg.schedule.intra_delay, window).unwrap();
    let mut model = hist.clone();
    for (c, m) in model.counts.iter_mut().zip(&expected) {
        *c = (m * 1e3).round() as u64;
    }
    let v_model = area_visibility(&model, cfg.schedule.intra_delay, window)
        .unwrap()
        .visibility;
    assert!(
        (area.visibility - v_model).abs() < 3.0 * area.error,
        "{} ± {} vs {v_model}",
        area.visibility,
        area.error
    );
    let v_true = visibility(cfg.emitter.gamma_fast, cfg.emitter.gamma_dp).unwrap();
    assert!(v_model < v_true - 0.005, "{v_model} vs {v_true}");
}
