//! IFFT detector: inverse-transform the band-limited quotient and read target
//! lags off the maxima of the resulting range profile.

use rustfft::num_complex::Complex;

use crate::detection::{greedy_maxima, parabolic_offset, DetectionResult, Method, Trace, TraceScale};
use crate::error::{Error, Result};
use crate::fft;
use crate::frontend::SpectrumQuotient;
use crate::scalar::{cast, wide, Real};

/// Which part of the inverse transform forms the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProfileMode {
    /// `Re(IDFT(q))`.
    #[default]
    Real,
    /// `|IDFT(q)|`, insensitive to the carrier phase each echo picks up.
    Magnitude,
}

impl std::str::FromStr for ProfileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(ProfileMode::Real),
            "magnitude" | "abs" => Ok(ProfileMode::Magnitude),
            other => Err(Error::param("profile_mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Sub-sample refinement applied to IFFT peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeakRefine {
    /// Sample positions only.
    None,
    /// Three-point parabola through the peak sample and its neighbours.
    Parabolic,
    /// Maximum of the exact band-limited interpolant of the profile.
    #[default]
    Interpolated,
}

impl std::str::FromStr for PeakRefine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "false" => Ok(PeakRefine::None),
            "parabolic" | "true" => Ok(PeakRefine::Parabolic),
            "interpolated" => Ok(PeakRefine::Interpolated),
            other => Err(Error::param("ifft_refine", format!("unknown refinement `{other}`"))),
        }
    }
}

impl std::fmt::Display for PeakRefine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PeakRefine::None => "none",
            PeakRefine::Parabolic => "parabolic",
            PeakRefine::Interpolated => "interpolated",
        })
    }
}

impl std::fmt::Display for ProfileMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProfileMode::Real => "real",
            ProfileMode::Magnitude => "magnitude",
        })
    }
}

/// Detection statistic over circular lag, one value per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile<T> {
    pub values: Vec<T>,
    pub lag_step_s: T,
}

impl<T: Real> RangeProfile<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
    }

    pub fn to_trace(&self, scale: TraceScale) -> Trace<T> {
        Trace {
            delays_s: (0..self.len())
                .map(|i| self.lag_step_s * cast(i as f64))
                .collect(),
            values: self.values.clone(),
            scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub lag_s: T,
    pub value: T,
    pub index: usize,
    pub refined: bool,
}

/// Result of a peak search; `requested - peaks.len()` peaks are missing when
/// the profile has too few local maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList<T> {
    /// Sorted by lag.
    pub peaks: Vec<Peak<T>>,
    pub requested: usize,
}

impl<T> PeakList<T> {
    pub fn shortfall(&self) -> usize {
        self.requested.saturating_sub(self.peaks.len())
    }
}

/// Real part of the inverse DFT of the quotient.
pub fn ifft_profile<T: Real>(q: &SpectrumQuotient<T>) -> Result<RangeProfile<T>> {
    ifft_profile_with(q, ProfileMode::Real)
}

pub fn ifft_profile_with<T: Real>(
    q: &SpectrumQuotient<T>,
    mode: ProfileMode,
) -> Result<RangeProfile<T>> {
    if q.valid_count() == 0 {
        return Err(Error::param("q", "pass band is empty"));
    }
    let time: Vec<Complex<T>> = fft::inverse(&q.bins);
    let values = match mode {
        ProfileMode::Real => time.iter().map(|z| z.re).collect(),
        ProfileMode::Magnitude => time.iter().map(|z| z.norm()).collect(),
    };
    Ok(RangeProfile {
        values,
        lag_step_s: T::one() / q.sample_rate_hz(),
    })
}

/// The `k` largest local maxima at least `min_sep_bins` apart (circular
/// lag), optionally refined by a three-point parabola. Sorted by lag.
pub fn find_peaks<T: Real>(
    p: &RangeProfile<T>,
    k: usize,
    min_sep_bins: usize,
    refine: bool,
) -> Result<PeakList<T>> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if min_sep_bins == 0 {
        return Err(Error::param("min_sep_bins", "must be at least 1"));
    }
    let n = p.len();
    let mut peaks: Vec<Peak<T>> = greedy_maxima(&p.values, k, min_sep_bins, true)
        .into_iter()
        .map(|i| {
            let offset = if refine {
                parabolic_offset(p.values[(i + n - 1) % n], p.values[i], p.values[(i + 1) % n])
            } else {
                T::zero()
            };
            let mut pos = cast::<T>(i as f64) + offset;
            if pos < T::zero() {
                pos = pos + cast(n as f64);
            }
            Peak {
                lag_s: pos * p.lag_step_s,
                value: p.values[i],
                index: i,
                refined: refine,
            }
        })
        .collect();
    peaks.sort_by(|a, b| a.lag_s.partial_cmp(&b.lag_s).unwrap_or(std::cmp::Ordering::Equal));
    Ok(PeakList { peaks, requested: k })
}

/// Maximizes the band-limited interpolant of the profile around each peak.
///
/// The profile at a fractional lag `tau` (in samples) is evaluated exactly
/// as `(1/N) sum_k q[k] exp(j 2 pi k' tau / N)` over the valid bins, `k'`
/// being the signed bin index, and a golden-section search locates the
/// maximum within `0.75` sample of the sampled peak.
pub fn refine_on_quotient<T: Real>(
    q: &SpectrumQuotient<T>,
    peaks: &mut [Peak<T>],
    mode: ProfileMode,
) {
    let n = q.len();
    let mut terms: Vec<(i64, Complex<f64>)> = (0..n)
        .filter(|&k| q.valid_mask[k])
        .map(|k| {
            let z = q.bins[k];
            (fft::signed_bin(k, n), Complex::new(wide(z.re), wide(z.im)))
        })
        .collect();
    if terms.is_empty() {
        return;
    }
    terms.sort_by_key(|t| t.0);
    let lag_step = 1.0 / wide(q.sample_rate_hz());
    let stat = |tau: f64| -> f64 {
        // Phasor recurrence over ascending bins; gaps are rare.
        let theta = std::f64::consts::TAU * tau / n as f64;
        let step = Complex::from_polar(1.0, theta);
        let mut k_prev = terms[0].0;
        let mut w = Complex::from_polar(1.0, theta * k_prev as f64);
        let mut sum = Complex::new(0.0, 0.0);
        for &(k, z) in &terms {
            let gap = k - k_prev;
            if gap == 1 {
                w *= step;
            } else if gap > 1 {
                w = Complex::from_polar(1.0, theta * k as f64);
            }
            k_prev = k;
            sum += z * w;
        }
        let v = sum / n as f64;
        match mode {
            ProfileMode::Real => v.re,
            ProfileMode::Magnitude => v.norm(),
        }
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for peak in peaks.iter_mut() {
        let centre = peak.index as f64;
        let (mut a, mut b) = (centre - 0.75, centre + 0.75);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (stat(c), stat(d));
        while b - a > 1e-6 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = stat(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = stat(d);
            }
        }
        let tau = 0.5 * (a + b);
        let tau = tau.rem_euclid(n as f64);
        peak.lag_s = cast(tau * lag_step);
        peak.value = cast(stat(tau));
        peak.refined = true;
    }
    peaks.sort_by(|a, b| a.lag_s.partial_cmp(&b.lag_s).unwrap_or(std::cmp::Ordering::Equal));
}

/// Converts peaks to a detection result with `range = c * lag`.
pub fn lags_to_result<T: Real>(peaks: &[Peak<T>], method: Method) -> Result<DetectionResult<T>> {
    DetectionResult::from_peaks(peaks.iter().map(|p| (p.lag_s, p.value)).collect(), method)
}
