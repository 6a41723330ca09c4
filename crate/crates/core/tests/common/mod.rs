#![allow(dead_code)]

use fmradar::frontend::{self, SpectrumQuotient};
use fmradar::signal_model::{self, EmitterSpec, SampledSignal};
use fmradar::Complex;
use rustfft::FftPlanner;

pub const FS: f64 = 2.0e6;
pub const C: f64 = 299_792_458.0;

/// O(N^2) forward DFT, no normalization.
pub fn dft_direct(x: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (i, z)| {
                let ang = -std::f64::consts::TAU * ((k * i) % n) as f64 / n as f64;
                acc + z * Complex::from_polar(1.0, ang)
            })
        })
        .collect()
}

/// Power spectrum from an FFT planned here, not through the crate.
pub fn power_spectrum(x: &[Complex<f64>]) -> Vec<f64> {
    let mut buf = x.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).collect()
}

/// Signed frequency of bin `k`.
pub fn bin_hz(k: usize, n: usize, fs: f64) -> f64 {
    let s = if k < n.div_ceil(2) { k as i64 } else { k as i64 - n as i64 };
    s as f64 * fs / n as f64
}

/// Width between the 0.5% and 99.5% points of the cumulative spectrum.
pub fn occupied_bw_99(x: &[Complex<f64>], fs: f64) -> f64 {
    let n = x.len();
    let p = power_spectrum(x);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|k| (bin_hz(k, n, fs), p[k])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = p.iter().sum();
    let mut acc = 0.0;
    let (mut lo, mut hi) = (None, None);
    for (f, e) in &pairs {
        acc += e;
        if lo.is_none() && acc >= 0.005 * total {
            lo = Some(*f);
        }
        if hi.is_none() && acc >= 0.995 * total {
            hi = Some(*f);
        }
    }
    hi.unwrap() - lo.unwrap()
}

pub fn energy(x: &[Complex<f64>]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn rms(x: &[Complex<f64>]) -> f64 {
    (energy(x) / x.len() as f64).sqrt()
}

/// FM direct signal with `channels` carriers centred on 90 kHz.
pub fn fm_direct(channels: usize, n: usize, seed: u64) -> SampledSignal<f64> {
    let spec = EmitterSpec::<f64>::with_channels(channels);
    let msgs: Vec<_> = (0..channels)
        .map(|k| signal_model::synthesize_message(seed + k as u64, n, 15e3, FS).unwrap())
        .collect();
    signal_model::compose_multichannel(&msgs, &spec).unwrap()
}

/// Full-band quotient of the unit-amplitude exponentials
/// `sum_i a_i exp(-j 2 pi k d_i / N)` over the signed bins.
pub fn synthetic_quotient(n: usize, delays_samples: &[f64], amps: &[f64]) -> SpectrumQuotient<f64> {
    let bins = (0..n)
        .map(|k| {
            let s = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            delays_samples.iter().zip(amps).fold(Complex::new(0.0, 0.0), |acc, (d, a)| {
                acc + Complex::from_polar(*a, -std::f64::consts::TAU * s * d / n as f64)
            })
        })
        .collect();
    SpectrumQuotient {
        bins,
        bin_spacing_hz: FS / n as f64,
        center_hz: 0.0,
        passband: (-FS / 2.0, FS / 2.0),
        valid_mask: vec![true; n],
    }
}

/// Carrier position after mixing down by 90 kHz rounded to the DFT grid.
pub fn residual_carrier_hz(n: usize) -> f64 {
    let df = FS / n as f64;
    90e3 - (90e3 / df).round() * df
}

/// Noiseless quotient for a real FM scene, band-passed to `width` Hz.
pub fn fm_quotient(channels: usize, n: usize, delays_s: &[f64], width: f64) -> SpectrumQuotient<f64> {
    let direct = fm_direct(channels, n, 11);
    let scene = signal_model::TargetScene {
        echoes: delays_s.iter().map(|&d| signal_model::Echo::new(d, 0.1)).collect(),
        direct_amplitude: 1.0,
        noise_std: 0.0,
    };
    let (r, s) = signal_model::render_scene(&direct, &scene, 0).unwrap();
    let df = FS / n as f64;
    let shift = (90e3 / df).round() * df;
    let r = frontend::ddc(&r, shift).unwrap();
    let s = frontend::ddc(&s, shift).unwrap();
    let q = frontend::quotient(&frontend::spectrum(&s).unwrap(), &frontend::spectrum(&r).unwrap(), 1e-3).unwrap();
    let c = residual_carrier_hz(n);
    let nyq = FS / 2.0;
    frontend::bandpass(&q, (c - width / 2.0).max(-nyq), (c + width / 2.0).min(nyq)).unwrap()
}
