//! DFT helpers with a fixed convention: forward unnormalized, inverse scaled
//! by `1/N`.
//!
//! Plans are cached in a per-thread planner so concurrent callers never share
//! mutable state.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::scalar::{cast, Real};

thread_local! {
    static PLANNERS: RefCell<HashMap<TypeId, Box<dyn Any>>> = RefCell::new(HashMap::new());
}

fn plan<T: Real>(len: usize, direction: FftDirection) -> Arc<dyn Fft<T>> {
    PLANNERS.with(|cell| {
        let mut map = cell.borrow_mut();
        let planner = map
            .entry(TypeId::of::<T>())
            .or_insert_with(|| Box::new(FftPlanner::<T>::new()))
            .downcast_mut::<FftPlanner<T>>()
            .expect("planner map is keyed by scalar type");
        planner.plan_fft(len, direction)
    })
}

/// In-place forward DFT, `X[k] = sum_n x[n] exp(-j 2 pi k n / N)`.
pub fn forward_in_place<T: Real>(buf: &mut [Complex<T>]) {
    if buf.len() > 1 {
        plan::<T>(buf.len(), FftDirection::Forward).process(buf);
    }
}

/// In-place inverse DFT including the `1/N` factor.
pub fn inverse_in_place<T: Real>(buf: &mut [Complex<T>]) {
    if buf.len() > 1 {
        plan::<T>(buf.len(), FftDirection::Inverse).process(buf);
    }
    let scale: T = cast(1.0 / buf.len() as f64);
    buf.iter_mut().for_each(|z| *z = z.scale(scale));
}

pub fn forward<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = x.to_vec();
    forward_in_place(&mut buf);
    buf
}

pub fn inverse<T: Real>(x: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut buf = x.to_vec();
    inverse_in_place(&mut buf);
    buf
}

/// Signed bin index of DFT bin `k` for a length-`n` transform:
/// `0..n/2` map to themselves, the upper half to negative frequencies.
#[inline]
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
