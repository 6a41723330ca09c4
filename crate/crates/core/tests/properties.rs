mod common;

use common::*;
use fmradar::cli_io::{parse_kv, render_kv, RunConfig};
use fmradar::detection::DetectionResult;
use fmradar::frontend::{bandpass, ddc, inverse_spectrum, spectrum};
use fmradar::ifft_detector::{find_peaks, ifft_profile_with, ProfileMode, RangeProfile};
use fmradar::music::{eig_subspace, estimate_covariance, MusicInput};
use fmradar::signal_model::{fm_modulate, render_scene, synthesize_message, Echo, EmitterSpec, SampledSignal, TargetScene};
use fmradar::{Complex, Method};
use proptest::prelude::*;

fn complex_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex::new(a, b)), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integer_delays_are_identified(d in 1usize..=1024, seed in 0u64..1000) {
        let n = 4096;
        let direct = fm_direct(1, n, seed);
        let sc = TargetScene { echoes: vec![Echo::new(d as f64 / FS, 0.1)], direct_amplitude: 1.0, noise_std: 0.0 };
        let (r, s) = render_scene(&direct, &sc, 0).unwrap();
        let q = fmradar::frontend::quotient(&spectrum(&s).unwrap(), &spectrum(&r).unwrap(), 1e-3).unwrap();
        let p = ifft_profile_with(&q, ProfileMode::Real).unwrap();
        prop_assert_eq!(p.argmax(), Some(d));
        // One more sample of delay moves the peak by one bin.
        let sc = TargetScene { echoes: vec![Echo::new((d + 1) as f64 / FS, 0.1)], ..sc };
        let (_, s) = render_scene(&direct, &sc, 0).unwrap();
        let q = fmradar::frontend::quotient(&spectrum(&s).unwrap(), &spectrum(&r).unwrap(), 1e-3).unwrap();
        prop_assert_eq!(ifft_profile_with(&q, ProfileMode::Real).unwrap().argmax(), Some(d + 1));
    }

    #[test]
    fn fm_envelope_is_exactly_constant(seed in any::<u64>(), amp in 0.1f64..10.0) {
        let spec = EmitterSpec { amplitude: amp, ..EmitterSpec::default() };
        let m = synthesize_message::<f64>(seed, 2048, 15e3, FS).unwrap();
        let s = fm_modulate(&m, &spec, 2048).unwrap();
        prop_assert!(s.samples.iter().all(|z| (z.norm() - amp).abs() < 1e-12 * amp));
        prop_assert!(m.samples.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn rendering_is_linear(t1 in 0.0f64..20e-6, dt in 0.1e-6f64..20e-6, a1 in 0.01f64..1.0, a2 in 0.01f64..1.0) {
        let direct = fm_direct(1, 1024, 3);
        let one = |echoes: Vec<Echo<f64>>| {
            render_scene(&direct, &TargetScene { echoes, direct_amplitude: 1.0, noise_std: 0.0 }, 0).unwrap().1.samples
        };
        let e1 = Echo::new(t1, a1);
        let e2 = Echo::new(t1 + dt, a2);
        let a = one(vec![e1]);
        let b = one(vec![e2]);
        let ab = one(vec![e1, e2]);
        let sum: Vec<Complex<f64>> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(max_abs_diff(&sum, &ab) <= 1e-10 * rms(&ab).max(1e-300));
    }

    #[test]
    fn spectrum_round_trip(x in complex_vec(2..600)) {
        let sig = SampledSignal::new(x.clone(), FS).unwrap();
        let back = inverse_spectrum(&spectrum(&sig).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&back.samples, &x) <= 1e-10 * rms(&x).max(1e-300));
        let e_t = energy(&x);
        let e_f = energy(&spectrum(&sig).unwrap().bins) / x.len() as f64;
        prop_assert!((e_t - e_f).abs() <= 1e-10 * e_t.max(1e-300));
    }

    #[test]
    fn ddc_is_unitary(x in complex_vec(8..300), f in -9.9e5f64..9.9e5) {
        let sig = SampledSignal::new(x.clone(), FS).unwrap();
        let y = ddc(&sig, f).unwrap();
        prop_assert!((energy(&y.samples) - energy(&x)).abs() <= 1e-12 * energy(&x).max(1e-300));
        let back = ddc(&y, -f).unwrap();
        prop_assert!(max_abs_diff(&back.samples, &x) <= 1e-12 * rms(&x).max(1e-300) + 1e-300);
    }

    #[test]
    fn bandpass_is_idempotent(lo in -9e5f64..0.0, width in 2e4f64..9e5) {
        let q = synthetic_quotient(512, &[3.2, 7.7], &[1.0, 0.5]);
        let hi = (lo + width).min(1e6);
        let once = bandpass(&q, lo, hi).unwrap();
        prop_assert_eq!(&bandpass(&once, lo, hi).unwrap(), &once);
        for k in 0..q.len() {
            if !once.valid_mask[k] {
                prop_assert_eq!(once.bins[k], Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn covariance_is_hermitian_psd_and_eigenvectors_orthonormal(x in complex_vec(16..80), fb in any::<bool>()) {
        let m = MusicInput { x, bin_spacing_hz: 1.0 };
        let l = 2 + m.n() / 4;
        let cov = estimate_covariance(&m, l, fb).unwrap();
        prop_assert_eq!(cov.r.hermitian_defect(), 0.0);
        let dec = eig_subspace(&cov, 1).unwrap();
        let tr = cov.r.trace();
        prop_assert!(dec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(dec.eigenvalues.iter().all(|v| *v >= -1e-8 * tr / l as f64));
        for a in 0..l {
            for b in 0..l {
                let (u, v) = (dec.eigenvectors.column(a), dec.eigenvectors.column(b));
                let dot: Complex<f64> = u.iter().zip(&v).map(|(p, q)| p.conj() * q).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - Complex::new(want, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn detection_results_are_sorted_ranges(peaks in prop::collection::vec((0.0f64..1e-3, 0.0f64..1.0), 1..10)) {
        let r = DetectionResult::from_peaks(peaks, Method::Ifft).unwrap();
        prop_assert!(r.delays_s.windows(2).all(|w| w[0] <= w[1]));
        for (d, x) in r.delays_s.iter().zip(&r.ranges_m) {
            prop_assert_eq!(*x, d * C);
        }
    }

    #[test]
    fn peaks_respect_separation(values in prop::collection::vec(0.0f64..1.0, 8..200), k in 1usize..6, sep in 1usize..10) {
        let n = values.len();
        let p = RangeProfile { values, lag_step_s: 1.0 };
        let found = find_peaks(&p, k, sep, false).unwrap();
        prop_assert!(found.peaks.len() <= k);
        for a in &found.peaks {
            for b in &found.peaks {
                if a.index != b.index {
                    let d = a.index.abs_diff(b.index);
                    prop_assert!(d.min(n - d) >= sep);
                }
            }
        }
    }

    #[test]
    fn config_snapshot_round_trips(ch in 1usize..8, sep in 1.0f64..1e4, snr in -10.0f64..60.0, seed in any::<u64>(), music in any::<bool>()) {
        let text = format!(
            "channel_count = {ch}\nseparation_m = {sep}\nsnr_db = {snr}\nseed = {seed}\nmethod = {}\n",
            if music { "MUSIC" } else { "IFFT" }
        );
        let c = RunConfig::from_kv(&parse_kv(&text).unwrap(), &[]).unwrap();
        let again = RunConfig::from_kv(&parse_kv(&render_kv(&c.snapshot())).unwrap(), &[]).unwrap();
        prop_assert_eq!(c.snapshot(), again.snapshot());
        prop_assert_eq!(again.scenario.separation_m, sep);
        prop_assert_eq!(again.scenario.snr_db, snr);
    }
}
