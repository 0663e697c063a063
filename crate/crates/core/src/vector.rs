//! Dense vector kernels used throughout the Krylov code.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{lit, Real};

#[inline]
pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
pub fn norm2<T: Real>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn scale<T: Real>(a: T, x: &mut [T]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

pub fn max_abs<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Linear combination `sum_j coeffs[j] * basis[j]`.
pub fn combine<T: Real>(basis: &[Vec<T>], coeffs: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for (b, &c) in basis.iter().zip(coeffs) {
        if c != T::zero() {
            axpy(c, b, &mut out);
        }
    }
    out
}

pub fn complex_norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Deterministic generator used for every random start vector.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector with independent entries uniform in `[-1, 1)`.
pub fn random_vector<T: Real, R: Rng>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n)
        .map(|_| lit(rng.random::<f64>() * 2.0 - 1.0))
        .collect()
}

/// Rademacher probe vector (entries +1 or -1).
pub fn rademacher<T: Real, R: Rng>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n)
        .map(|_| if rng.random::<bool>() { T::one() } else { -T::one() })
        .collect()
}
