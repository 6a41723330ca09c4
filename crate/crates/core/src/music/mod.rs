//! MUSIC delay estimation on the frequency-domain quotient.
//!
//! Over the pass band, every point target contributes
//! `a * exp(-j 2 pi f t0)` to the quotient, i.e. a complex exponential in the
//! bin index with angular rate `omega = -2 pi df t0` (forward-DFT sign). The
//! in-band bins therefore form a sum-of-sinusoids record; its covariance is
//! estimated by forward-backward spatial smoothing, split into signal and
//! noise subspaces, and the pseudospectrum
//! `P(omega) = 1 / sum_noise |s(omega)^H q_m|^2` peaks at the target rates.

mod eigen;
mod matrix;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::num_traits::Zero;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use matrix::CMatrix;

use crate::constants;
use crate::detection::{greedy_maxima, parabolic_offset, DetectionResult, Method, Trace, TraceScale};
use crate::error::{Error, Result};
use crate::fft;
use crate::frontend::SpectrumQuotient;
use crate::scalar::{cast, cis, wide, Real};

/// Frequency-ordered in-band quotient bins.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicInput<T> {
    pub x: Vec<Complex<T>>,
    pub bin_spacing_hz: T,
}

impl<T: Real> MusicInput<T> {
    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Two complex exponentials in white noise, `x = S a + w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTwoToneModel<T> {
    pub amplitudes: [Complex<T>; 2],
    /// rad/sample, in `[-pi, pi)`.
    pub omegas: [T; 2],
    pub noise_var: T,
    pub n: usize,
}

impl<T: Real> SyntheticTwoToneModel<T> {
    /// One noisy realization.
    pub fn generate(&self, seed: u64) -> MusicInput<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = (wide(self.noise_var) / 2.0).sqrt();
        let x = (0..self.n)
            .map(|n| {
                let mut z = Complex::<T>::zero();
                for (a, w) in self.amplitudes.iter().zip(&self.omegas) {
                    z = z + *a * cis::<T>(wide(*w) * n as f64);
                }
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                z + Complex::new(cast(re * sd), cast(im * sd))
            })
            .collect();
        MusicInput {
            x,
            bin_spacing_hz: T::one(),
        }
    }

    /// Ensemble covariance of a length-`l` window with independent source
    /// phases: `sum_i |a_i|^2 s(w_i) s(w_i)^H + sigma^2 I`.
    pub fn exact_covariance(&self, l: usize) -> CovarianceEstimate<T> {
        let mut r = CMatrix::zeros(l);
        for (a, w) in self.amplitudes.iter().zip(&self.omegas) {
            r.add_outer(&steering(wide(*w), l), a.norm_sqr());
        }
        for i in 0..l {
            r[(i, i)] = r[(i, i)] + Complex::new(self.noise_var, T::zero());
        }
        CovarianceEstimate {
            r,
            subvector_len: l,
            n_snapshots: 0,
            forward_backward: false,
        }
    }
}

/// Sample covariance of length-`L` subvectors. `n_snapshots == 0` marks an
/// analytic (ensemble) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate<T> {
    pub r: CMatrix<T>,
    pub subvector_len: usize,
    pub n_snapshots: usize,
    pub forward_backward: bool,
}

#[derive(Debug, Clone)]
pub struct SubspaceDecomposition<T> {
    /// Descending.
    pub eigenvalues: Vec<T>,
    /// Columns `q_0 .. q_{L-1}`; columns `p..` span the noise subspace.
    pub eigenvectors: CMatrix<T>,
    pub p: usize,
    /// Mean of the noise eigenvalues.
    pub noise_floor: T,
}

impl<T: Real> SubspaceDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn noise_vectors(&self) -> impl Iterator<Item = Vec<Complex<T>>> + '_ {
        (self.p..self.dim()).map(|j| self.eigenvectors.column(j))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pseudospectrum<T> {
    /// rad/sample, uniform.
    pub omegas: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> Pseudospectrum<T> {
    pub fn grid_size(&self) -> usize {
        self.omegas.len()
    }

    fn step(&self) -> f64 {
        let n = self.omegas.len();
        if n < 2 {
            return 0.0;
        }
        (wide(self.omegas[n - 1]) - wide(self.omegas[0])) / (n - 1) as f64
    }

    /// True when the grid covers a whole `2 pi` period.
    pub fn is_full_circle(&self) -> bool {
        let span = self.step() * self.omegas.len() as f64;
        (span / std::f64::consts::TAU - 1.0).abs() < 1e-5
    }
}

/// Steering vector `[1, e^{jw}, ..., e^{jw(L-1)}]`.
pub fn steering<T: Real>(omega: f64, l: usize) -> Vec<Complex<T>> {
    (0..l).map(|k| cis(omega * k as f64)).collect()
}

/// Maps an angular rate (rad/bin) to a delay folded into `[0, 1/df)`.
pub fn omega_to_delay(omega: f64, bin_spacing_hz: f64) -> f64 {
    // `+ 0.0` turns a negative zero into a positive one.
    let cycles = (-omega / std::f64::consts::TAU).rem_euclid(1.0) + 0.0;
    cycles / bin_spacing_hz
}

/// Angular rate of a target at `delay_s`: `-2 pi df delay`, wrapped to
/// `[-pi, pi)`.
pub fn delay_to_omega(delay_s: f64, bin_spacing_hz: f64) -> f64 {
    let w = -std::f64::consts::TAU * bin_spacing_hz * delay_s;
    (w + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
}

/// In-band quotient bins in ascending frequency order.
pub fn build_snapshot<T: Real>(q: &SpectrumQuotient<T>) -> Result<MusicInput<T>> {
    let order: Vec<usize> = q.ascending_bins().collect();
    let valid: Vec<usize> = (0..order.len()).filter(|&i| q.valid_mask[order[i]]).collect();
    let (first, last) = match (valid.first(), valid.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Err(Error::param("q", "pass band is empty")),
    };
    if last - first + 1 != valid.len() {
        return Err(Error::param("q", "pass band is not contiguous"));
    }
    Ok(MusicInput {
        x: order[first..=last].iter().map(|&k| q.bins[k]).collect(),
        bin_spacing_hz: q.bin_spacing_hz,
    })
}

/// Sums each run of `factor` adjacent bins (a trailing partial run is
/// dropped). A tone at rate `w` stays a tone, now at `factor * w`, while
/// white noise gains `factor` in power against the tone's `factor^2`.
pub fn condense<T: Real>(m: &MusicInput<T>, factor: usize) -> Result<MusicInput<T>> {
    if factor == 0 {
        return Err(Error::param("factor", "must be at least 1"));
    }
    let n_out = m.n() / factor;
    if n_out < 8 {
        return Err(Error::param(
            "factor",
            format!("{} bins condensed by {factor} leaves fewer than 8", m.n()),
        ));
    }
    let x = m
        .x
        .chunks_exact(factor)
        .take(n_out)
        .map(|c| c.iter().fold(Complex::zero(), |acc, z| acc + *z))
        .collect();
    Ok(MusicInput {
        x,
        bin_spacing_hz: m.bin_spacing_hz * cast(factor as f64),
    })
}

/// Spatially smoothed covariance `(1/K) sum_k x_k x_k^H` over the
/// `K = n - L + 1` sliding subvectors, optionally averaged with its
/// forward-backward counterpart `J conj(R) J`.
pub fn estimate_covariance<T: Real>(
    m: &MusicInput<T>,
    subvector_len: usize,
    forward_backward: bool,
) -> Result<CovarianceEstimate<T>> {
    let n = m.n();
    if subvector_len < 2 || subvector_len + 1 > n {
        return Err(Error::param(
            "subvector_len",
            format!("{subvector_len} must lie in [2, {}]", n.saturating_sub(1)),
        ));
    }
    let l = subvector_len;
    let k = n - l + 1;
    let mut r = CMatrix::zeros(l);
    for window in m.x.windows(l) {
        r.add_outer(window, T::one());
    }
    r.scale(T::one() / cast(k as f64));
    if forward_backward {
        let half: T = cast(0.5);
        r = CMatrix::from_fn(l, |i, j| (r[(i, j)] + r[(l - 1 - i, l - 1 - j)].conj()).scale(half));
    }
    // exact Hermitian symmetry
    for i in 0..l {
        r[(i, i)] = Complex::new(r[(i, i)].re, T::zero());
        for j in i + 1..l {
            let avg = (r[(i, j)] + r[(j, i)].conj()).scale(cast(0.5));
            r[(i, j)] = avg;
            r[(j, i)] = avg.conj();
        }
    }
    Ok(CovarianceEstimate {
        r,
        subvector_len: l,
        n_snapshots: k,
        forward_backward,
    })
}

/// Eigen-split into a `p`-dimensional signal and `L - p` noise subspace.
pub fn eig_subspace<T: Real>(cov: &CovarianceEstimate<T>, p: usize) -> Result<SubspaceDecomposition<T>> {
    let l = cov.r.dim();
    if p == 0 || p >= l {
        return Err(Error::param("p", format!("{p} must lie in [1, {}]", l.saturating_sub(1))));
    }
    let eig = hermitian_eigen(&cov.r)?;
    let tail = &eig.values[p..];
    let noise_floor = tail.iter().fold(T::zero(), |a, &v| a + v) / cast(tail.len() as f64);
    Ok(SubspaceDecomposition {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        p,
        noise_floor,
    })
}

const DENOMINATOR_FLOOR: f64 = 1e-30;

/// `P(w) = 1 / sum_{m >= p} |s(w)^H q_m|^2` on `grid_size` uniform points of
/// `[omega_lo, omega_hi)`.
pub fn pseudospectrum<T: Real>(
    dec: &SubspaceDecomposition<T>,
    grid_size: usize,
    omega_lo: T,
    omega_hi: T,
) -> Result<Pseudospectrum<T>> {
    if grid_size < 64 {
        return Err(Error::param("grid_size", "must be at least 64"));
    }
    if !(omega_lo < omega_hi) {
        return Err(Error::param("omega_lo", "grid must satisfy omega_lo < omega_hi"));
    }
    let (lo, hi) = (wide(omega_lo), wide(omega_hi));
    let step = (hi - lo) / grid_size as f64;
    let omegas: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();
    let full_circle = ((hi - lo) - std::f64::consts::TAU).abs() < 1e-12;
    let denom = if full_circle && grid_size >= dec.dim() {
        projection_fft(dec, lo, grid_size)
    } else {
        projection_direct(dec, &omegas)
    };
    Ok(Pseudospectrum {
        omegas: omegas.into_iter().map(cast).collect(),
        values: denom
            .into_iter()
            .map(|d| cast(1.0 / d.max(DENOMINATOR_FLOOR)))
            .collect(),
    })
}

fn projection_direct<T: Real>(dec: &SubspaceDecomposition<T>, omegas: &[f64]) -> Vec<f64> {
    let l = dec.dim();
    let noise: Vec<Vec<Complex<T>>> = dec.noise_vectors().collect();
    omegas
        .iter()
        .map(|&w| {
            let s = steering::<T>(w, l);
            noise
                .iter()
                .map(|q| {
                    let dot = s
                        .iter()
                        .zip(q)
                        .fold(Complex::<T>::zero(), |acc, (a, b)| acc + a.conj() * *b);
                    wide(dot.norm_sqr())
                })
                .sum()
        })
        .collect()
}

// s(w_i)^H q = sum_l q[l] e^{-j lo l} e^{-j 2 pi i l / G}: one length-G DFT
// per noise eigenvector.
fn projection_fft<T: Real>(dec: &SubspaceDecomposition<T>, lo: f64, grid: usize) -> Vec<f64> {
    let mut acc = vec![0.0f64; grid];
    let mut buf = vec![Complex::<T>::zero(); grid];
    for q in dec.noise_vectors() {
        buf.iter_mut().for_each(|z| *z = Complex::zero());
        for (l, z) in q.iter().enumerate() {
            buf[l] = *z * cis::<T>(-lo * l as f64);
        }
        fft::forward_in_place(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += wide(z.norm_sqr());
        }
    }
    acc
}

/// The `p` strongest pseudospectrum maxima converted to delays via
/// `t0 = -w / (2 pi df)`, folded into `[0, 1/df)`. Refinement fits a
/// parabola to the peak in dB.
pub fn music_delays<T: Real>(
    p_spec: &Pseudospectrum<T>,
    p: usize,
    bin_spacing_hz: T,
    refine: bool,
) -> Result<DetectionResult<T>> {
    if p == 0 {
        return Err(Error::param("p", "must be at least 1"));
    }
    let df = wide(bin_spacing_hz);
    if !(df > 0.0) {
        return Err(Error::param("bin_spacing_hz", "must be positive"));
    }
    let n = p_spec.grid_size();
    let circular = p_spec.is_full_circle();
    let step = p_spec.step();
    let db: Vec<f64> = p_spec.values.iter().map(|v| 10.0 * wide(*v).log10()).collect();
    let picks = greedy_maxima(&db, p, 1, circular);
    let peaks: Vec<(T, T)> = picks
        .iter()
        .map(|&i| {
            let mut w = wide(p_spec.omegas[i]);
            let has_neighbours = circular || (i > 0 && i + 1 < n);
            if refine && has_neighbours {
                let off = parabolic_offset(db[(i + n - 1) % n], db[i], db[(i + 1) % n]);
                w += off * step;
            }
            (cast(omega_to_delay(w, df)), p_spec.values[i])
        })
        .collect();

    let mut trace: Vec<(T, T)> = p_spec
        .omegas
        .iter()
        .zip(&p_spec.values)
        .map(|(w, v)| (cast(omega_to_delay(wide(*w), df)), *v))
        .collect();
    trace.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let trace = Trace {
        delays_s: trace.iter().map(|t| t.0).collect(),
        values: trace.iter().map(|t| t.1).collect(),
        scale: TraceScale::Power,
    };

    let mut result = if peaks.is_empty() {
        DetectionResult::empty(Method::Music)
    } else {
        DetectionResult::from_peaks(peaks, Method::Music)?
    };
    result.trace = Some(trace);
    Ok(result
        .with_meta("sources", p)
        .with_meta("shortfall", p - picks.len())
        .with_meta("refined", refine)
        .with_meta("bin_spacing_hz", df))
}

/// Settings of the end-to-end MUSIC detector.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicParams {
    /// Length of the snapshot after condensing the in-band bins; `0` keeps
    /// every bin.
    pub snapshot_len: usize,
    /// Subvector length `L`; `0` selects `min(32, n / 2)`.
    pub subvector_len: usize,
    pub forward_backward: bool,
    pub sources: usize,
    pub grid_size: usize,
    pub refine: bool,
}

impl Default for MusicParams {
    fn default() -> Self {
        Self {
            snapshot_len: 0,
            subvector_len: 0,
            forward_backward: true,
            sources: constants::MUSIC_SOURCES,
            grid_size: constants::MUSIC_GRID,
            refine: true,
        }
    }
}

impl MusicParams {
    pub fn resolved_subvector_len(&self, n: usize) -> usize {
        if self.subvector_len == 0 {
            32.min(n / 2)
        } else {
            self.subvector_len
        }
    }
}

/// Complete MUSIC chain from a band-passed quotient to delays.
pub fn music_detect<T: Real>(q: &SpectrumQuotient<T>, params: &MusicParams) -> Result<DetectionResult<T>> {
    let raw = build_snapshot(q)?;
    let factor = if params.snapshot_len == 0 || params.snapshot_len >= raw.n() {
        1
    } else {
        raw.n() / params.snapshot_len
    };
    let snap = condense(&raw, factor)?;
    let l = params.resolved_subvector_len(snap.n());
    let cov = estimate_covariance(&snap, l, params.forward_backward)?;
    let dec = eig_subspace(&cov, params.sources)?;
    let pi = std::f64::consts::PI;
    let ps = pseudospectrum(&dec, params.grid_size, cast::<T>(-pi), cast::<T>(pi))?;
    Ok(music_delays(&ps, params.sources, snap.bin_spacing_hz, params.refine)?
        .with_meta("condense_factor", factor)
        .with_meta("snapshot_len", snap.n())
        .with_meta("subvector_len", l)
        .with_meta("forward_backward", params.forward_backward)
        .with_meta("grid_size", params.grid_size)
        .with_meta("noise_floor", wide(dec.noise_floor)))
}
