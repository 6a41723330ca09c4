use fmradar::experiments::*;
use fmradar::ifft_detector::PeakRefine;
use fmradar::{Error, Method};

const C: f64 = 299_792_458.0;

fn cfg(channel_count: usize, separation_m: f64, method: Method, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        channel_count,
        separation_m,
        method,
        seed,
        ..ScenarioConfig::default()
    }
}

fn gap_m(cfg: &ScenarioConfig) -> f64 {
    let r = run_scenario(cfg).unwrap();
    assert!(r.len() >= 2, "only {} detections", r.len());
    let i = r.strongest(2);
    r.ranges_m[i[1]] - r.ranges_m[i[0]]
}

#[test]
fn one_channel_ifft_separates_3_km() {
    let gap = gap_m(&cfg(1, 3000.0, Method::Ifft, 1));
    assert!((gap - 3000.0).abs() <= 150.0, "gap {gap}");
    // Averaged over realizations the lobe interaction cancels out.
    let mean = (1..=10).map(|s| gap_m(&cfg(1, 3000.0, Method::Ifft, s))).sum::<f64>() / 10.0;
    assert!((mean - 3000.0).abs() <= 150.0, "mean gap {mean}");
}

#[test]
fn seven_channel_music_separates_300_m() {
    for seed in 1..=3 {
        let gap = gap_m(&cfg(7, 300.0, Method::Music, seed));
        assert!((gap - 300.0).abs() <= 60.0, "seed {seed}: gap {gap}");
    }
}

#[test]
fn one_channel_music_separates_2_km_with_occupied_passband() {
    for seed in 1..=5 {
        let mut c = cfg(1, 2000.0, Method::Music, seed);
        c.detector_params.passband_hz = Some(160e3);
        let gap = gap_m(&c);
        assert!((gap / C - 6.67e-6).abs() <= 0.667e-6, "seed {seed}: gap {gap}");
    }
}

/// With the default channel-wide pass band the band edges, where the
/// reference is weak, taper the regularized quotient; MUSIC then stretches
/// the gap by roughly a tenth. Pinned here so a change in that bias shows.
#[test]
fn one_channel_music_2_km_gap_on_default_passband() {
    let n = 10;
    let gaps: Vec<f64> = (1..=n).map(|s| gap_m(&cfg(1, 2000.0, Method::Music, s))).collect();
    let mean = gaps.iter().sum::<f64>() / n as f64;
    assert!(mean > 2000.0 && mean < 1.15 * 2000.0, "mean gap {mean}");
    assert!(gaps.iter().all(|g| (g - 2000.0).abs() < 0.2 * 2000.0), "{gaps:?}");
}

#[test]
fn coincident_targets_do_not_resolve() {
    for method in Method::ALL {
        let c = cfg(3, 0.0, method, 2);
        let r = run_scenario(&c).unwrap();
        assert!(!resolvability(&r, c.true_delays(), 0.5));
    }
}

#[test]
fn metadata_records_the_configuration() {
    let c = cfg(3, 1000.0, Method::Music, 4);
    let r = run_scenario(&c).unwrap();
    for (k, v) in c.to_metadata() {
        assert_eq!(r.metadata.get(&k), Some(&v), "key {k}");
    }
    assert!(r.metadata.contains_key("passband_lo_hz"));
    assert_eq!(run_scenario(&c).unwrap(), r);
}

#[test]
fn pipeline_errors_name_their_stage() {
    let mut c = cfg(1, 1000.0, Method::Ifft, 1);
    c.detector_params.passband_hz = Some(100.0);
    match run_scenario(&c) {
        Err(Error::Stage { stage, .. }) => assert_eq!(stage, "bandpass"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn wide_noiseless_pair_always_resolves() {
    let base = ScenarioConfig {
        snr_db: f64::INFINITY,
        ..ScenarioConfig::default()
    };
    let report = resolution_sweep(&base, &[3], &Method::ALL, &[15_000.0], 1, 7).unwrap();
    assert!(report.cells.iter().all(|c| c.resolve_rate == 1.0));
    for m in Method::ALL {
        assert_eq!(report.row(3, m).unwrap().min_resolved_separation_m, Some(15_000.0));
    }
}

#[test]
fn sweep_rejects_empty_inputs() {
    let base = ScenarioConfig::default();
    assert!(resolution_sweep(&base, &[], &Method::ALL, &[1000.0], 1, 1).is_err());
    assert!(resolution_sweep(&base, &[1], &Method::ALL, &[1000.0], 0, 1).is_err());
    assert!(monte_carlo_error(&base, McSettings::default(), &[1], &Method::ALL, 0, 1).is_err());
}

#[test]
fn noiseless_integer_delay_is_exact() {
    let mut c = cfg(1, 0.0, Method::Ifft, 5);
    c.snr_db = f64::INFINITY;
    let delay = 37.0 / c.sample_rate_hz;
    let q = simulate_quotient(&c, &[delay]).unwrap();
    let mut params = c.detector_params.clone();
    params.ifft_refine = PeakRefine::None;
    let r = detect(&q, Method::Ifft, &params, 1).unwrap();
    assert_eq!(100.0 * (r.delays_s[0] - delay).abs() / delay, 0.0);
    params.ifft_refine = PeakRefine::Interpolated;
    let r = detect(&q, Method::Ifft, &params, 1).unwrap();
    assert!(100.0 * (r.delays_s[0] - delay).abs() / delay < 1e-4);
}

#[test]
fn monte_carlo_is_reproducible() {
    let base = ScenarioConfig::default();
    let a = monte_carlo_error(&base, McSettings::default(), &[1, 3], &Method::ALL, 4, 11).unwrap();
    let b = monte_carlo_error(&base, McSettings::default(), &[1, 3], &Method::ALL, 4, 11).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    for p in &a {
        assert!(p.mean_rel_error_pct >= 0.0);
        assert_eq!(p.iterations, 4);
        assert_eq!(p.excluded, 0);
    }
}

#[test]
fn sweep_is_reproducible() {
    let base = ScenarioConfig::default();
    let seps = [2000.0, 500.0];
    let a = resolution_sweep(&base, &[1], &Method::ALL, &seps, 3, 5).unwrap();
    let b = resolution_sweep(&base, &[1], &Method::ALL, &seps, 3, 5).unwrap();
    assert_eq!(a, b);
    assert!(a.cells.iter().all(|c| (0.0..=1.0).contains(&c.resolve_rate)));
}
