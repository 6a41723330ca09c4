//! FM illuminator synthesis and target-scene rendering.
//!
//! The programme signal is band-limited Gaussian noise. Each FM channel is a
//! constant-envelope carrier whose phase is the trapezoidal running integral
//! of the programme. Target echoes are circularly delayed copies of the
//! direct signal, realized as a linear phase ramp in the DFT domain so that
//! fractional-sample delays are exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::num_traits::Zero;

use crate::constants;
use crate::error::{Error, Result};
use crate::fft;
use crate::scalar::{cast, cis, frac_cycles, wide, Real};

/// Parameters of an FM broadcast emitter, possibly spanning several channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterSpec<T> {
    /// Offset of the (composite) carrier from complex-baseband zero, Hz.
    pub carrier_offset_hz: T,
    /// Peak frequency deviation, Hz.
    pub freq_deviation_hz: T,
    pub channel_count: usize,
    pub channel_spacing_hz: T,
    /// Linear amplitude of every channel.
    pub amplitude: T,
}

impl<T: Real> Default for EmitterSpec<T> {
    fn default() -> Self {
        Self {
            carrier_offset_hz: cast(constants::CARRIER_OFFSET_HZ),
            freq_deviation_hz: cast(constants::FREQ_DEVIATION_HZ),
            channel_count: 1,
            channel_spacing_hz: cast(constants::CHANNEL_SPACING_HZ),
            amplitude: cast(constants::DIRECT_AMPLITUDE),
        }
    }
}

impl<T: Real> EmitterSpec<T> {
    pub fn with_channels(channel_count: usize) -> Self {
        Self {
            channel_count,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_deviation_hz > T::zero()) {
            return Err(Error::param("freq_deviation_hz", "must be positive"));
        }
        if self.channel_count == 0 {
            return Err(Error::param("channel_count", "must be at least 1"));
        }
        if !(self.channel_spacing_hz > T::zero()) {
            return Err(Error::param("channel_spacing_hz", "must be positive"));
        }
        let occupied = self.channel_count as f64 * wide(self.channel_spacing_hz);
        if occupied > constants::MAX_OCCUPIED_BANDWIDTH_HZ {
            return Err(Error::param(
                "channel_count",
                format!("occupied bandwidth {occupied} Hz exceeds 20 MHz"),
            ));
        }
        if !self.carrier_offset_hz.is_finite() || !self.amplitude.is_finite() {
            return Err(Error::param("carrier_offset_hz", "must be finite"));
        }
        Ok(())
    }

    /// Carrier offset of channel `k` (0-based), channels centred on
    /// `carrier_offset_hz`.
    pub fn channel_offset_hz(&self, k: usize) -> f64 {
        let centre = (self.channel_count as f64 - 1.0) / 2.0;
        wide(self.carrier_offset_hz) + (k as f64 - centre) * wide(self.channel_spacing_hz)
    }

    /// Nominal occupied bandwidth, `channel_count * channel_spacing_hz`.
    pub fn occupied_bandwidth_hz(&self) -> T {
        cast::<T>(self.channel_count as f64) * self.channel_spacing_hz
    }
}

/// Normalized real programme signal `x_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSignal<T> {
    pub samples: Vec<T>,
    pub sample_rate_hz: T,
    pub seed: u64,
}

/// Uniformly sampled complex baseband record.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    pub samples: Vec<Complex<T>>,
    pub sample_rate_hz: T,
    /// Time of the first sample, s.
    pub t0_offset_s: T,
}

impl<T: Real> SampledSignal<T> {
    pub fn new(samples: Vec<Complex<T>>, sample_rate_hz: T) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("samples", "signal must have at least one sample"));
        }
        if !(sample_rate_hz > T::zero()) || !sample_rate_hz.is_finite() {
            return Err(Error::param("sample_rate_hz", "must be positive and finite"));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            t0_offset_s: T::zero(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> T {
        cast::<T>(self.samples.len() as f64) / self.sample_rate_hz
    }

    pub fn energy(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// `index,re,im` rows under a header. Values print in shortest
    /// round-trip form, so [`Self::from_csv`] restores them exactly.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,re,im\n");
        for (i, z) in self.samples.iter().enumerate() {
            s.push_str(&format!("{i},{},{}\n", wide(z.re), wide(z.im)));
        }
        s
    }

    pub fn from_csv(text: &str, sample_rate_hz: T) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("index,re,im") {
            return Err(Error::Format("signal csv must start with `index,re,im`".into()));
        }
        let samples = lines
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(row, line)| {
                let bad = || Error::Format(format!("signal csv row {}: `{line}`", row + 1));
                let f: Vec<&str> = line.split(',').map(str::trim).collect();
                if f.len() != 3 || f[0].parse::<usize>().ok() != Some(row) {
                    return Err(bad());
                }
                let re: f64 = f[1].parse().map_err(|_| bad())?;
                let im: f64 = f[2].parse().map_err(|_| bad())?;
                Ok(Complex::new(cast(re), cast(im)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples, sample_rate_hz)
    }

    /// Little-endian binary form: [`SIGNAL_MAGIC`], `u32` sample count, then
    /// `(re, im)` as `f64` pairs.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let count = u32::try_from(self.len())
            .map_err(|_| Error::param("samples", "too many samples for the binary format"))?;
        let mut out = Vec::with_capacity(12 + 16 * self.len());
        out.extend_from_slice(SIGNAL_MAGIC);
        out.extend_from_slice(&count.to_le_bytes());
        for z in &self.samples {
            out.extend_from_slice(&wide(z.re).to_le_bytes());
            out.extend_from_slice(&wide(z.im).to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], sample_rate_hz: T) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..8] != SIGNAL_MAGIC {
            return Err(Error::Format("missing signal magic".into()));
        }
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = &bytes[12..];
        if body.len() != 16 * count {
            return Err(Error::Format(format!(
                "header announces {count} samples but {} payload bytes follow",
                body.len()
            )));
        }
        let f = |b: &[u8]| f64::from_le_bytes(b.try_into().unwrap());
        let samples = body
            .chunks_exact(16)
            .map(|c| Complex::new(cast(f(&c[..8])), cast(f(&c[8..]))))
            .collect();
        Self::new(samples, sample_rate_hz)
    }
}

/// Leading bytes of the binary signal format.
pub const SIGNAL_MAGIC: &[u8; 8] = b"FMRSIG01";

/// A point-target echo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Echo<T> {
    pub delay_s: T,
    pub amplitude: T,
    /// Extra reflection phase on top of the propagation delay, rad.
    pub phase_rad: T,
}

impl<T: Real> Echo<T> {
    pub fn new(delay_s: T, amplitude: T) -> Self {
        Self {
            delay_s,
            amplitude,
            phase_rad: T::zero(),
        }
    }
}

/// Direct path, echoes and receiver noise of one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScene<T> {
    /// Echoes with strictly increasing delays.
    pub echoes: Vec<Echo<T>>,
    pub direct_amplitude: T,
    /// Total complex noise standard deviation; each quadrature gets `sigma^2 / 2`.
    pub noise_std: T,
}

impl<T: Real> TargetScene<T> {
    pub fn validate(&self, duration_s: T) -> Result<()> {
        for (i, e) in self.echoes.iter().enumerate() {
            if !(e.delay_s >= T::zero()) {
                return Err(Error::param("echoes", format!("echo {i} has negative delay")));
            }
            if !(e.amplitude > T::zero()) {
                return Err(Error::param("echoes", format!("echo {i} amplitude must be positive")));
            }
            if e.delay_s >= duration_s {
                return Err(Error::param(
                    "echoes",
                    format!("echo {i} delay {} s is not shorter than the record", e.delay_s),
                ));
            }
        }
        if self.echoes.windows(2).any(|w| !(w[1].delay_s > w[0].delay_s)) {
            return Err(Error::param("echoes", "delays must be strictly increasing"));
        }
        if !(self.noise_std >= T::zero()) {
            return Err(Error::param("noise_std", "must be non-negative"));
        }
        Ok(())
    }
}

const CLIP_RMS: f64 = 1.5;
const LIMITER_PASSES: usize = 6;

/// Band-limited, peak-limited Gaussian programme signal, normalized to a
/// peak of 1.
///
/// White noise is shaped by an ideal DFT-domain low-pass that keeps
/// `0 < |f| <= audio_bw_hz` (the DC bin is removed, so the mean is zero).
/// A few clip-and-refilter passes then lower the crest factor the way a
/// broadcast audio processor does, so the carrier spends most of its time
/// near full deviation. Every pass ends with the ideal low-pass, so nothing
/// leaks above `audio_bw_hz`.
pub fn synthesize_message<T: Real>(
    seed: u64,
    n_samples: usize,
    audio_bw_hz: T,
    sample_rate_hz: T,
) -> Result<MessageSignal<T>> {
    let fs = wide(sample_rate_hz);
    let bw = wide(audio_bw_hz);
    if n_samples < 16 {
        return Err(Error::param("n_samples", "at least 16 samples are required"));
    }
    if !(fs > 0.0) || !fs.is_finite() {
        return Err(Error::param("sample_rate_hz", "must be positive"));
    }
    if !(bw > 0.0 && bw < fs / 2.0) {
        return Err(Error::param(
            "audio_bw_hz",
            format!("must lie in (0, {}) Hz", fs / 2.0),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex<f64>> = (0..n_samples)
        .map(|_| Complex::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    let df = fs / n_samples as f64;
    let lowpass = |buf: &mut Vec<Complex<f64>>| {
        fft::forward_in_place(buf);
        for (k, z) in buf.iter_mut().enumerate() {
            let f = fft::signed_bin(k, n_samples).abs() as f64 * df;
            if k == 0 || f > bw {
                *z = Complex::zero();
            }
        }
        fft::inverse_in_place(buf);
        buf.iter_mut().for_each(|z| z.im = 0.0);
    };
    lowpass(&mut buf);
    // Peak limiting: clip at CLIP_RMS times the rms, then band-limit again.
    for _ in 0..LIMITER_PASSES {
        let rms = (buf.iter().map(|z| z.re * z.re).sum::<f64>() / n_samples as f64).sqrt();
        if rms == 0.0 {
            break;
        }
        let limit = CLIP_RMS * rms;
        buf.iter_mut().for_each(|z| z.re = z.re.clamp(-limit, limit));
        lowpass(&mut buf);
    }
    let peak = buf.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::param("audio_bw_hz", "passband holds no DFT bins"));
    }
    Ok(MessageSignal {
        samples: buf.iter().map(|z| cast(z.re / peak)).collect(),
        sample_rate_hz,
        seed,
    })
}

/// Single-channel FM modulator.
///
/// `s[n] = A exp(j 2 pi (f_c n / f_s + f_dev I[n]))` where `I` is the
/// trapezoidal running integral of the message with step `1 / f_s`.
pub fn fm_modulate<T: Real>(
    msg: &MessageSignal<T>,
    spec: &EmitterSpec<T>,
    n_samples: usize,
) -> Result<SampledSignal<T>> {
    spec.validate()?;
    if spec.channel_count != 1 {
        return Err(Error::param(
            "channel_count",
            "fm_modulate takes a single-channel spec; use compose_multichannel",
        ));
    }
    modulate_at(msg, spec, wide(spec.carrier_offset_hz), n_samples)
}

fn modulate_at<T: Real>(
    msg: &MessageSignal<T>,
    spec: &EmitterSpec<T>,
    carrier_hz: f64,
    n_samples: usize,
) -> Result<SampledSignal<T>> {
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be positive"));
    }
    if msg.samples.len() < n_samples {
        return Err(Error::param(
            "msg",
            format!("message has {} samples, {n_samples} needed", msg.samples.len()),
        ));
    }
    let fs = wide(msg.sample_rate_hz);
    if !(fs > 0.0) {
        return Err(Error::param("sample_rate_hz", "must be positive"));
    }
    let amp = spec.amplitude;
    let dev = wide(spec.freq_deviation_hz);
    let carrier_step = carrier_hz / fs;
    let half_dt = 0.5 / fs;

    // Phase in cycles, wrapped each step to keep full precision on long records.
    let mut carrier_cycles = 0.0f64;
    let mut integral = 0.0f64;
    let mut prev = wide(msg.samples[0]);
    let mut out = Vec::with_capacity(n_samples);
    for (n, &x) in msg.samples[..n_samples].iter().enumerate() {
        let x = wide(x);
        if n > 0 {
            integral += half_dt * (prev + x);
            carrier_cycles = frac_cycles(carrier_cycles + carrier_step);
        }
        prev = x;
        let cycles = frac_cycles(carrier_cycles + frac_cycles(dev * integral));
        out.push(cis::<T>(std::f64::consts::TAU * cycles).scale(amp));
    }
    SampledSignal::new(out, msg.sample_rate_hz)
}

/// Sum of `channel_count` independently modulated carriers at
/// `f_c + (k - (C-1)/2) * spacing`, one message per channel.
pub fn compose_multichannel<T: Real>(
    messages: &[MessageSignal<T>],
    spec: &EmitterSpec<T>,
) -> Result<SampledSignal<T>> {
    spec.validate()?;
    if messages.len() != spec.channel_count {
        return Err(Error::param(
            "messages",
            format!(
                "{} messages supplied for {} channels",
                messages.len(),
                spec.channel_count
            ),
        ));
    }
    let n = messages[0].samples.len();
    let fs = messages[0].sample_rate_hz;
    if messages
        .iter()
        .any(|m| m.samples.len() != n || m.sample_rate_hz != fs)
    {
        return Err(Error::param("messages", "lengths and sample rates must agree"));
    }
    let mut acc = vec![Complex::<T>::zero(); n];
    for (k, msg) in messages.iter().enumerate() {
        let channel = modulate_at(msg, spec, spec.channel_offset_hz(k), n)?;
        for (a, s) in acc.iter_mut().zip(&channel.samples) {
            *a = *a + *s;
        }
    }
    SampledSignal::new(acc, fs)
}

/// Circular fractional delay of a record by `delay_s`, applied as
/// `exp(-j 2 pi f delay)` on the signed DFT frequencies.
pub fn delay_signal<T: Real>(sig: &SampledSignal<T>, delay_s: T) -> Vec<Complex<T>> {
    let mut spec = fft::forward(&sig.samples);
    apply_delay_ramp(&mut spec, wide(sig.sample_rate_hz), wide(delay_s));
    fft::inverse_in_place(&mut spec);
    spec
}

fn apply_delay_ramp<T: Real>(spec: &mut [Complex<T>], fs: f64, delay_s: f64) {
    let n = spec.len();
    // delay in samples; phase per bin is -2 pi k d / N
    let d = delay_s * fs;
    for (k, z) in spec.iter_mut().enumerate() {
        let kk = fft::signed_bin(k, n) as f64;
        let cycles = frac_cycles(-kk * d / n as f64);
        *z = *z * cis::<T>(std::f64::consts::TAU * cycles);
    }
}

/// Renders the direct (reference) channel and the surveillance channel.
///
/// The surveillance channel is `sum_k A_k e^{j phi_k} s(t - t_k) + w`, with `w` circular
/// complex Gaussian of total variance `noise_std^2`. The reference output is
/// `direct_amplitude * direct` and stays noiseless.
pub fn render_scene<T: Real>(
    direct: &SampledSignal<T>,
    scene: &TargetScene<T>,
    seed: u64,
) -> Result<(SampledSignal<T>, SampledSignal<T>)> {
    scene.validate(direct.duration_s())?;
    let n = direct.len();
    let fs = wide(direct.sample_rate_hz);
    let base = fft::forward(&direct.samples);

    let mut surv_spec = vec![Complex::<T>::zero(); n];
    let mut scratch = vec![Complex::<T>::zero(); n];
    for echo in &scene.echoes {
        scratch.copy_from_slice(&base);
        apply_delay_ramp(&mut scratch, fs, wide(echo.delay_s));
        let gain = cis::<T>(wide(echo.phase_rad)).scale(echo.amplitude);
        for (acc, z) in surv_spec.iter_mut().zip(&scratch) {
            *acc = *acc + *z * gain;
        }
    }
    fft::inverse_in_place(&mut surv_spec);

    let sigma = wide(scene.noise_std);
    if sigma > 0.0 {
        let per_component = sigma / std::f64::consts::SQRT_2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for z in surv_spec.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z = *z + Complex::new(cast(re * per_component), cast(im * per_component));
        }
    }

    let mut surveillance = SampledSignal::new(surv_spec, direct.sample_rate_hz)?;
    surveillance.t0_offset_s = direct.t0_offset_s;
    let direct_out = SampledSignal {
        samples: direct
            .samples
            .iter()
            .map(|z| z.scale(scene.direct_amplitude))
            .collect(),
        sample_rate_hz: direct.sample_rate_hz,
        t0_offset_s: direct.t0_offset_s,
    };
    Ok((direct_out, surveillance))
}

/// Noise standard deviation giving `snr_db` for an echo of `echo_amplitude`
/// (`SNR = A_r^2 / sigma^2`).
pub fn noise_std_for_snr(echo_amplitude: f64, snr_db: f64) -> f64 {
    echo_amplitude / 10f64.powf(snr_db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 2.0e6;

    fn tone_message(value: f64, n: usize) -> MessageSignal<f64> {
        MessageSignal {
            samples: vec![value; n],
            sample_rate_hz: FS,
            seed: 0,
        }
    }

    #[test]
    fn message_is_deterministic_and_normalized() {
        let a = synthesize_message::<f64>(7, 4096, 15e3, FS).unwrap();
        let b = synthesize_message::<f64>(7, 4096, 15e3, FS).unwrap();
        assert_eq!(a, b);
        let peak = a.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak - 1.0).abs() < 1e-12);
        let c = synthesize_message::<f64>(8, 4096, 15e3, FS).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn message_rejects_bad_parameters() {
        assert!(synthesize_message::<f64>(7, 1 << 12, 1.5e6, FS).is_err());
        assert!(synthesize_message::<f64>(7, 8, 15e3, FS).is_err());
        assert!(synthesize_message::<f64>(7, 1024, 0.0, FS).is_err());
    }

    #[test]
    fn zero_message_gives_carrier_tone() {
        let spec = EmitterSpec::<f64>::default();
        let s = fm_modulate(&tone_message(0.0, 64), &spec, 64).unwrap();
        let step = std::f64::consts::TAU * 90e3 / FS;
        for w in s.samples.windows(2) {
            let d = (w[1] * w[0].conj()).arg();
            assert!((d - step).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_message_shifts_tone_by_deviation() {
        let spec = EmitterSpec::<f64>::default();
        let s = fm_modulate(&tone_message(1.0, 64), &spec, 64).unwrap();
        let step = std::f64::consts::TAU * (90e3 + 75e3) / FS;
        for w in s.samples.windows(2) {
            let d = (w[1] * w[0].conj()).arg();
            assert!((d - step).abs() < 1e-12);
        }
    }

    #[test]
    fn modulator_rejects_multichannel_spec() {
        let spec = EmitterSpec::<f64>::with_channels(3);
        assert!(fm_modulate(&tone_message(0.0, 32), &spec, 32).is_err());
    }

    #[test]
    fn emitter_validation() {
        assert!(EmitterSpec::<f64>::with_channels(0).validate().is_err());
        assert!(EmitterSpec::<f64>::with_channels(101).validate().is_err());
        assert!(EmitterSpec::<f64>::with_channels(100).validate().is_ok());
        let s = EmitterSpec::<f64> {
            freq_deviation_hz: 0.0,
            ..EmitterSpec::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn channel_offsets_are_centred() {
        let s = EmitterSpec::<f64>::with_channels(3);
        let offs: Vec<f64> = (0..3).map(|k| s.channel_offset_hz(k)).collect();
        assert_eq!(offs, vec![-110e3, 90e3, 290e3]);
    }

    #[test]
    fn render_rejects_bad_scenes() {
        let direct = SampledSignal::new(vec![Complex::new(1.0, 0.0); 100], FS).unwrap();
        let late = TargetScene {
            echoes: vec![Echo::new(50e-6, 1.0)],
            direct_amplitude: 1.0,
            noise_std: 0.0,
        };
        assert!(render_scene(&direct, &late, 0).is_err());
        let unordered = TargetScene {
            echoes: vec![
                Echo::new(10e-6, 1.0),
                Echo::new(5e-6, 1.0),
            ],
            direct_amplitude: 1.0,
            noise_std: 0.0,
        };
        assert!(render_scene(&direct, &unordered, 0).is_err());
    }

    #[test]
    fn noise_has_requested_variance() {
        let direct = SampledSignal::new(vec![Complex::new(0.0, 0.0); 1 << 15], FS).unwrap();
        let scene = TargetScene {
            echoes: vec![],
            direct_amplitude: 1.0,
            noise_std: 0.5,
        };
        let (_, surv) = render_scene(&direct, &scene, 3).unwrap();
        let n = surv.len() as f64;
        let var_re = surv.samples.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        let var_im = surv.samples.iter().map(|z| z.im * z.im).sum::<f64>() / n;
        assert!((var_re - 0.125).abs() < 0.01);
        assert!((var_im - 0.125).abs() < 0.01);
    }

    #[test]
    fn snr_mapping() {
        assert!((noise_std_for_snr(0.1, 20.0) - 0.01).abs() < 1e-15);
    }
}
