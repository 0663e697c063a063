//! Symmetric tridiagonal matrices and the implicit QL eigensolver.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::dense::{DenseMat, DenseSym};

/// Symmetric tridiagonal matrix with diagonal `alpha` and off-diagonal `beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriDiag<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
}

impl<T: Real> TriDiag<T> {
    pub fn new(alpha: Vec<T>, beta: Vec<T>) -> Result<Self> {
        if alpha.is_empty() || beta.len() + 1 != alpha.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal needs len(beta) = len(alpha) - 1, got {} and {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut y = self.alpha[i] * x[i];
                if i > 0 {
                    y += self.beta[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    y += self.beta[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm1(&self) -> T {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut s = self.alpha[i].abs();
                if i > 0 {
                    s += self.beta[i - 1].abs();
                }
                if i + 1 < m {
                    s += self.beta[i].abs();
                }
                s
            })
            .fold(T::zero(), T::max)
    }

    pub fn to_dense(&self) -> DenseSym<T> {
        let m = self.dim();
        let mut d = DenseSym::zeros(m);
        for i in 0..m {
            d.set(i, i, self.alpha[i]);
            if i + 1 < m {
                d.set(i + 1, i, self.beta[i]);
            }
        }
        d
    }
}

/// Eigenvalues (ascending) and optionally the orthonormal eigenvectors of `t`,
/// stored as the columns of the returned matrix.
pub fn sym_tridiag_eig<T: Real>(t: &TriDiag<T>, want_vectors: bool) -> Result<(Vec<T>, Option<DenseMat<T>>)> {
    let m = t.dim();
    let mut d = t.alpha.clone();
    let mut e = t.beta.clone();
    e.push(T::zero());
    let mut z = want_vectors.then(|| DenseMat::identity(m));
    ql_implicit(&mut d, &mut e, z.as_mut().map(|z| z.data_mut()))?;
    sort_pairs(&mut d, z.as_mut());
    Ok((d, z))
}

/// Implicit QL iteration with Wilkinson-type shifts on `(d, e)` where `e[i]`
/// couples rows `i` and `i+1` and `e[n-1]` is ignored. When `z` is given it must
/// hold an `n x n` column-major matrix; the rotations are accumulated into its
/// columns.
pub(crate) fn ql_implicit<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut [T]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = lit::<T>(2.0);
    const MAX_ITER: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::NoConvergence { iterations: MAX_ITER });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let signed_r = if g >= T::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Sorts eigenvalues ascending, permuting eigenvector columns alongside.
pub(crate) fn sort_pairs<T: Real>(d: &mut Vec<T>, z: Option<&mut DenseMat<T>>) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    *d = idx.iter().map(|&i| d[i]).collect();
    if let Some(z) = z {
        *z = z.select_columns(&idx);
    }
}
