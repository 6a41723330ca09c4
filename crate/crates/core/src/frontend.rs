//! Receiver chain shared by both detectors: down-conversion, spectra of the
//! reference and surveillance channels, their regularized quotient and an
//! ideal band-pass mask.
//!
//! DFT convention: forward unnormalized, inverse scaled by `1/N`. Bin `k`
//! sits at `center_hz + signed(k) * bin_spacing_hz`, where `signed` maps the
//! upper half of the bins to negative frequencies.

use rustfft::num_complex::Complex;
use rustfft::num_traits::Zero;

use crate::error::{Error, Result};
use crate::fft;
use crate::scalar::{cast, cis, frac_cycles, wide, Real};
use crate::signal_model::SampledSignal;

/// Minimum number of valid bins a quotient must keep.
pub const MIN_VALID_BINS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub bins: Vec<Complex<T>>,
    pub bin_spacing_hz: T,
    pub center_hz: T,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Frequency of bin `k`, Hz.
    pub fn freq_hz(&self, k: usize) -> T {
        bin_freq(k, self.bins.len(), self.bin_spacing_hz, self.center_hz)
    }

    pub fn sample_rate_hz(&self) -> T {
        self.bin_spacing_hz * cast(self.bins.len() as f64)
    }
}

/// Surveillance-to-reference spectral ratio with its pass-band bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumQuotient<T> {
    pub bins: Vec<Complex<T>>,
    pub bin_spacing_hz: T,
    pub center_hz: T,
    /// Inclusive pass band `(lo, hi)` in absolute Hz.
    pub passband: (T, T),
    pub valid_mask: Vec<bool>,
}

impl<T: Real> SpectrumQuotient<T> {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn freq_hz(&self, k: usize) -> T {
        bin_freq(k, self.bins.len(), self.bin_spacing_hz, self.center_hz)
    }

    pub fn valid_count(&self) -> usize {
        self.valid_mask.iter().filter(|&&v| v).count()
    }

    pub fn sample_rate_hz(&self) -> T {
        self.bin_spacing_hz * cast(self.bins.len() as f64)
    }

    /// Bin indices in ascending frequency order.
    pub fn ascending_bins(&self) -> impl Iterator<Item = usize> {
        let n = self.bins.len();
        let half = n.div_ceil(2);
        (half..n).chain(0..half)
    }
}

fn bin_freq<T: Real>(k: usize, n: usize, df: T, center: T) -> T {
    center + df * cast(fft::signed_bin(k, n) as f64)
}

/// Mixes `sig` down by `f_shift_hz`: `y[n] = x[n] exp(-j 2 pi f n / f_s)`.
pub fn ddc<T: Real>(sig: &SampledSignal<T>, f_shift_hz: T) -> Result<SampledSignal<T>> {
    let fs = wide(sig.sample_rate_hz);
    let shift = wide(f_shift_hz);
    if !(shift.abs() < fs / 2.0) {
        return Err(Error::param(
            "f_shift_hz",
            format!("|{shift}| Hz must be below f_s/2 = {} Hz", fs / 2.0),
        ));
    }
    let step = -shift / fs;
    let samples = sig
        .samples
        .iter()
        .enumerate()
        .map(|(n, z)| *z * cis::<T>(std::f64::consts::TAU * frac_cycles(step * n as f64)))
        .collect();
    Ok(SampledSignal {
        samples,
        sample_rate_hz: sig.sample_rate_hz,
        t0_offset_s: sig.t0_offset_s,
    })
}

/// Forward DFT of a record.
pub fn spectrum<T: Real>(sig: &SampledSignal<T>) -> Result<Spectrum<T>> {
    if sig.len() < 2 {
        return Err(Error::param("sig", "spectrum needs at least 2 samples"));
    }
    Ok(Spectrum {
        bins: fft::forward(&sig.samples),
        bin_spacing_hz: sig.sample_rate_hz / cast(sig.len() as f64),
        center_hz: T::zero(),
    })
}

/// Inverse of [`spectrum`].
pub fn inverse_spectrum<T: Real>(spec: &Spectrum<T>) -> Result<SampledSignal<T>> {
    SampledSignal::new(fft::inverse(&spec.bins), spec.sample_rate_hz())
}

/// Regularized division `surv * conj(ref) / (|ref|^2 + eps)` with
/// `eps = eps_rel * max |ref|^2`. The pass band starts as the full band.
pub fn quotient<T: Real>(
    surv: &Spectrum<T>,
    reference: &Spectrum<T>,
    eps_rel: T,
) -> Result<SpectrumQuotient<T>> {
    if surv.len() != reference.len() {
        return Err(Error::param(
            "surv",
            format!("{} bins vs reference {}", surv.len(), reference.len()),
        ));
    }
    if surv.bin_spacing_hz != reference.bin_spacing_hz || surv.center_hz != reference.center_hz {
        return Err(Error::param("surv", "bin spacing and centre must match the reference"));
    }
    if !(eps_rel >= T::zero()) {
        return Err(Error::param("eps_rel", "must be non-negative"));
    }
    let peak = reference
        .bins
        .iter()
        .fold(T::zero(), |m, z| m.max(z.norm_sqr()));
    let eps = eps_rel * peak;
    let bins = surv
        .bins
        .iter()
        .zip(&reference.bins)
        .map(|(s, r)| {
            let den = r.norm_sqr() + eps;
            if den > T::zero() {
                (*s * r.conj()).unscale(den)
            } else {
                Complex::zero()
            }
        })
        .collect();
    let fs = surv.sample_rate_hz();
    let half = fs / cast(2.0);
    Ok(SpectrumQuotient {
        bins,
        bin_spacing_hz: surv.bin_spacing_hz,
        center_hz: surv.center_hz,
        passband: (surv.center_hz - half, surv.center_hz + half),
        valid_mask: vec![true; surv.len()],
    })
}

/// Ideal rectangular band-pass: zeroes and invalidates every bin outside
/// `[lo_hz, hi_hz]`. Bins already masked stay masked.
pub fn bandpass<T: Real>(
    q: &SpectrumQuotient<T>,
    lo_hz: T,
    hi_hz: T,
) -> Result<SpectrumQuotient<T>> {
    let half = q.sample_rate_hz() / cast(2.0);
    let (nyq_lo, nyq_hi) = (q.center_hz - half, q.center_hz + half);
    if !(lo_hz < hi_hz) {
        return Err(Error::param("lo_hz", "pass band must satisfy lo < hi"));
    }
    if lo_hz < nyq_lo || hi_hz > nyq_hi {
        return Err(Error::param(
            "lo_hz",
            format!("pass band [{lo_hz}, {hi_hz}] Hz exceeds the Nyquist range"),
        ));
    }
    let mut out = q.clone();
    for k in 0..out.bins.len() {
        let f = out.freq_hz(k);
        if f < lo_hz || f > hi_hz {
            out.bins[k] = Complex::zero();
            out.valid_mask[k] = false;
        }
    }
    if out.valid_count() < MIN_VALID_BINS {
        return Err(Error::param(
            "lo_hz",
            format!(
                "pass band [{lo_hz}, {hi_hz}] Hz keeps {} bins, at least {MIN_VALID_BINS} needed",
                out.valid_count()
            ),
        ));
    }
    out.passband = (q.passband.0.max(lo_hz), q.passband.1.min(hi_hz));
    Ok(out)
}
