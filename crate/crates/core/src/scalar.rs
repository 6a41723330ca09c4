//! Scalar abstraction shared by every numeric module.
//!
//! All signal-processing code is written against [`Real`], which is
//! implemented for `f32` and `f64`. Phase accumulators and random draws are
//! carried in `f64` internally and narrowed at the end, so `f32` builds keep
//! long-record phase accuracy.

use std::fmt::{Debug, Display, LowerExp};

use rustfft::num_complex::Complex;
use rustfft::num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    FftNum + Float + FloatConst + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: FftNum + Float + FloatConst + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
}

/// Converts an `f64` literal or intermediate into `T`.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 is representable in every Real type")
}

/// Widens `T` to `f64`.
#[inline]
pub fn wide<T: Real>(x: T) -> f64 {
    x.to_f64().expect("Real types widen to f64")
}

/// `exp(j * angle)` with the angle given in radians as `f64`.
#[inline]
pub fn cis<T: Real>(angle: f64) -> Complex<T> {
    let (s, c) = angle.sin_cos();
    Complex::new(cast(c), cast(s))
}

/// Wraps a phase measured in cycles into `[0, 1)`.
#[inline]
pub fn frac_cycles(cycles: f64) -> f64 {
    cycles - cycles.floor()
}
