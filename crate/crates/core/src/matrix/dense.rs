//! Small dense matrices: symmetric storage, column-major rectangular blocks,
//! and full symmetric eigendecompositions.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::tridiag::{ql_implicit, sort_pairs, TriDiag};

const DENSE_LIMIT: usize = 5000;

/// Dense symmetric matrix, column-major, writes mirrored across the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSym<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseSym<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in j..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.n + i] = v;
        self.data[i * self.n + j] = v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for j in 0..self.n {
            let xj = x[j];
            for (yi, &a) in y.iter_mut().zip(&self.data[j * self.n..(j + 1) * self.n]) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn norm_fro(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|j| self.data[j * self.n..(j + 1) * self.n].iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

/// Dense rectangular matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMat<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMat<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_columns(nrows: usize, cols: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(nrows * cols.len());
        for c in cols {
            assert_eq!(c.len(), nrows, "column length");
            data.extend_from_slice(c);
        }
        Self { nrows, ncols: cols.len(), data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.nrows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.nrows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.nrows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self { nrows: self.nrows, ncols: idx.len(), data }
    }

    pub fn into_columns(self) -> Vec<Vec<T>> {
        if self.nrows == 0 {
            return vec![Vec::new(); self.ncols];
        }
        self.data.chunks(self.nrows).map(|c| c.to_vec()).collect()
    }
}

fn guard(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { what: "dense dimension", value: n, limit: DENSE_LIMIT });
    }
    Ok(())
}

/// Householder reduction of a symmetric matrix (row-major `a`, overwritten).
/// Returns `(d, e)` with `e[i]` coupling rows `i-1` and `i` (`e[0] = 0`); when
/// `accumulate` is set, `a` ends up holding the orthogonal transformation.
fn tred2<T: Real>(a: &mut [T], n: usize, accumulate: bool) -> (Vec<T>, Vec<T>) {
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let two = lit::<T>(2.0);
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale: T = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == T::zero() {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l];
                let mut g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = T::zero();
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    g = T::zero();
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in j + 1..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h * two);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    if n > 0 {
        d[0] = T::zero();
        e[0] = T::zero();
    }
    for i in 0..n {
        if accumulate {
            if d[i] != T::zero() {
                for j in 0..i {
                    let g: T = (0..i).map(|k| a[i * n + k] * a[k * n + j]).sum();
                    for k in 0..i {
                        let aki = a[k * n + i];
                        a[k * n + j] -= g * aki;
                    }
                }
            }
            d[i] = a[i * n + i];
            a[i * n + i] = T::one();
            for j in 0..i {
                a[j * n + i] = T::zero();
                a[i * n + j] = T::zero();
            }
        } else {
            d[i] = a[i * n + i];
        }
    }
    (d, e)
}

/// Orthogonal similarity reduction of `m` to tridiagonal form.
pub fn householder_tridiagonalize<T: Real>(m: &DenseSym<T>) -> Result<TriDiag<T>> {
    guard(m.n)?;
    let n = m.n;
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let mut a = m.data.clone();
    let (d, e) = tred2(&mut a, n, false);
    TriDiag::new(d, e[1..].to_vec())
}

/// Full eigendecomposition by Householder tridiagonalization followed by
/// implicit QL. Eigenvalues ascending; eigenvectors are the columns.
pub fn dense_sym_eig<T: Real>(m: &DenseSym<T>) -> Result<(Vec<T>, DenseMat<T>)> {
    guard(m.n)?;
    let n = m.n;
    let mut a = m.data.clone();
    let (mut d, mut e) = tred2(&mut a, n, true);
    if n > 0 {
        e.rotate_left(1);
        e[n - 1] = T::zero();
    }
    // `a` is row-major Q; its transpose buffer is Q column-major.
    let mut z = DenseMat::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            z.data[i * n + k] = a[k * n + i];
        }
    }
    ql_implicit(&mut d, &mut e, Some(z.data_mut()))?;
    sort_pairs(&mut d, Some(&mut z));
    Ok((d, z))
}

/// Cyclic Jacobi eigendecomposition. Slow but independent of the QL code, so it
/// serves as a cross-check oracle.
pub fn jacobi_eig<T: Real>(m: &DenseSym<T>) -> Result<(Vec<T>, DenseMat<T>)> {
    guard(m.n)?;
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = DenseMat::identity(n);
    let fro = m.norm_fro();
    let tol = T::epsilon() * fro;
    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for q in 0..n {
            for p in 0..q {
                off += a[q * n + p] * a[q * n + p];
            }
        }
        if off.sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[q * n + p];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (lit::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    a[p * n + k] = c * akp - s * akq;
                    a[q * n + k] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[k * n + p];
                    let aqk = a[k * n + q];
                    a[k * n + p] = c * apk - s * aqk;
                    a[k * n + q] = s * apk + c * aqk;
                }
                a[q * n + p] = T::zero();
                a[p * n + q] = T::zero();
                let (vp, vq) = (p * n, q * n);
                for k in 0..n {
                    let x = v.data[vp + k];
                    let y = v.data[vq + k];
                    v.data[vp + k] = c * x - s * y;
                    v.data[vq + k] = s * x + c * y;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: MAX_SWEEPS });
    }
    let mut d: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    sort_pairs(&mut d, Some(&mut v));
    Ok((d, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::tridiag::sym_tridiag_eig;
    use crate::vector::{random_vector, rng_from_seed};

    fn random_sym(n: usize, seed: u64) -> DenseSym<f64> {
        let mut rng = rng_from_seed(seed);
        let r: Vec<f64> = random_vector(n * n, &mut rng);
        DenseSym::from_fn(n, |i, j| r[i * n + j])
    }

    fn check(m: &DenseSym<f64>, vals: &[f64], z: &DenseMat<f64>) {
        let n = m.n();
        let scale = m.norm1();
        for i in 0..n {
            let mz = m.matvec(z.col(i));
            let r: f64 = mz.iter().zip(z.col(i)).map(|(a, b)| (a - vals[i] * b).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1e-10 * scale, "residual {r}");
            for j in 0..n {
                let d: f64 = z.col(i).iter().zip(z.col(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() <= 1e-10 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn diagonal_input() {
        let m = DenseSym::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
        let (v, z) = dense_sym_eig(&m).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f64::abs(z.get(i, j)), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn mirrored_storage() {
        let mut m = DenseSym::<f64>::zeros(3);
        m.set(2, 0, 4.0);
        assert_eq!(m.get(0, 2), 4.0);
    }

    #[test]
    fn householder_and_jacobi_agree() {
        for (n, seed) in [(1, 0), (2, 1), (7, 2), (40, 3), (90, 4)] {
            let m = random_sym(n, seed);
            let (v, z) = dense_sym_eig(&m).unwrap();
            check(&m, &v, &z);
            let (w, y) = jacobi_eig(&m).unwrap();
            check(&m, &w, &y);
            for (a, b) in v.iter().zip(&w) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn tridiagonal_reduction_preserves_spectrum() {
        let m = random_sym(35, 11);
        let t = householder_tridiagonalize(&m).unwrap();
        let (a, _) = sym_tridiag_eig(&t, false).unwrap();
        let (b, _) = dense_sym_eig(&m).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn guard_enforced() {
        let m = DenseSym::<f64> { n: DENSE_LIMIT + 1, data: Vec::new() };
        assert!(matches!(dense_sym_eig(&m), Err(Error::TooLarge { .. })));
    }
}
