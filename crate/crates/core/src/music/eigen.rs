//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then annihilates the now-real pivot with a real plane rotation.
//! Sweeps continue until the off-diagonal Frobenius norm falls below
//! `n * eps` relative to the whole matrix.

use rustfft::num_complex::Complex;
use rustfft::num_traits::Zero;

use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cast, wide, Real};

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Descending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: CMatrix<T>,
}

fn off_norm_sqr<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

pub fn hermitian_eigen<T: Real>(input: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = input.dim();
    // Symmetrize so roundoff in the input cannot stall convergence.
    let mut a = CMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex::new(input[(i, i)].re, T::zero())
        } else {
            (input[(i, j)] + input[(j, i)].conj()).scale(cast(0.5))
        }
    });
    let mut v = CMatrix::identity(n);
    let norm = a.frobenius_norm();
    let tol = T::epsilon() * norm * cast(n.max(1) as f64);
    let tol_sqr = tol * tol;

    let mut sweeps = 0;
    while off_norm_sqr(&a) > tol_sqr {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numeric {
                sweeps,
                off_norm: wide(off_norm_sqr(&a).sqrt()),
                norm: wide(norm),
                dim: n,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == T::zero() {
        return;
    }
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    // Skip pivots already negligible next to both diagonal entries.
    let small = cast::<T>(1e-3) * T::epsilon();
    if g < small * alpha.abs() && g < small * beta.abs() {
        a[(p, q)] = Complex::zero();
        a[(q, p)] = Complex::zero();
        return;
    }
    let e = apq.unscale(g);
    let tau = (beta - alpha) / (g + g);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    // U = [[c, s], [-s conj(e), c conj(e)]] acting on coordinates (p, q).
    let u00 = Complex::new(c, T::zero());
    let u01 = Complex::new(s, T::zero());
    let u10 = e.conj().scale(-s);
    let u11 = e.conj().scale(c);

    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * u00 + akq * u10;
        a[(k, q)] = akp * u01 + akq * u11;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
        a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * u00 + vkq * u10;
        v[(k, q)] = vkp * u01 + vkq * u11;
    }
}
