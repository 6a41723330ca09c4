//! Passive-radar range resolution with FM broadcast illuminators.
//!
//! The crate simulates a multi-channel FM emitter illuminating point targets,
//! runs the shared receiver chain (down-conversion, spectra, regularized
//! spectral division, band-pass) and estimates target delays with two
//! detectors: an inverse-FFT range profile and a MUSIC pseudospectrum over
//! the in-band quotient bins. The [`experiments`] module turns these into
//! resolution sweeps and Monte Carlo error curves; [`cli_io`] holds the
//! configuration format, the CSV/record writers and the command drivers.
//!
//! Signal-processing types are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod constants;
pub mod detection;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod frontend;
pub mod ifft_detector;
pub mod music;
pub mod scalar;
pub mod signal_model;

pub use rustfft::num_complex::Complex;

pub use detection::{DetectionResult, Method, Trace, TraceScale};
pub use error::{Error, Result};
pub use scalar::Real;

pub type SampledSignal64 = signal_model::SampledSignal<f64>;
pub type SampledSignal32 = signal_model::SampledSignal<f32>;
pub type Spectrum64 = frontend::Spectrum<f64>;
pub type Spectrum32 = frontend::Spectrum<f32>;
pub type SpectrumQuotient64 = frontend::SpectrumQuotient<f64>;
pub type SpectrumQuotient32 = frontend::SpectrumQuotient<f32>;
pub type RangeProfile64 = ifft_detector::RangeProfile<f64>;
pub type RangeProfile32 = ifft_detector::RangeProfile<f32>;
pub type MusicInput64 = music::MusicInput<f64>;
pub type MusicInput32 = music::MusicInput<f32>;
pub type Pseudospectrum64 = music::Pseudospectrum<f64>;
pub type Pseudospectrum32 = music::Pseudospectrum<f32>;
pub type DetectionResult64 = DetectionResult<f64>;
pub type DetectionResult32 = DetectionResult<f32>;
