use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::dense::DenseSym;

/// Sparse real symmetric matrix in compressed sparse row form.
///
/// Symmetric matrices are always held in full storage: both `(i,j)` and
/// `(j,i)` are present. Construction validates the pattern and the numerical
/// symmetry of the values.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

fn symmetry_tol<T: Real>() -> T {
    lit::<T>(1e-14).max(T::epsilon() * lit(4.0))
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn try_new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, vals: Vec<T>) -> Result<Self> {
        if row_ptr.len() != n + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_ptr has length {} for n = {n}",
                row_ptr.len()
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidStructure("row_ptr[0] must be 0".into()));
        }
        if row_ptr[n] != col_idx.len() || col_idx.len() != vals.len() {
            return Err(Error::InvalidStructure(format!(
                "row_ptr[n] = {}, {} column indices, {} values",
                row_ptr[n],
                col_idx.len(),
                vals.len()
            )));
        }
        for i in 0..n {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidStructure(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &c) in cols.iter().enumerate() {
                if c >= n {
                    return Err(Error::InvalidStructure(format!(
                        "column index {c} out of range in row {i}"
                    )));
                }
                if k > 0 && cols[k - 1] >= c {
                    return Err(Error::InvalidStructure(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        let m = Self { n, row_ptr, col_idx, vals };
        m.check_symmetry()?;
        Ok(m)
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({i},{j}) outside a {n}x{n} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut out_vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, T)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == c {
                    *out_vals.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    out_vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::try_new(n, row_ptr, col_idx, out_vals)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let n = d.len();
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: d.to_vec(),
        }
    }

    /// Constant-coefficient symmetric tridiagonal matrix `tridiag(off, diag, off)`.
    pub fn tridiagonal(n: usize, diag: T, off: T) -> Self {
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, off));
            }
            t.push((i, i, diag));
            if i + 1 < n {
                t.push((i, i + 1, off));
            }
        }
        Self::from_triplets(n, &t).expect("tridiagonal pattern is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.vals
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    fn check_symmetry(&self) -> Result<()> {
        let tol = symmetry_tol::<T>();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    continue;
                }
                let (tc, tv) = self.row(j);
                let vt = match tc.binary_search(&i) {
                    Ok(p) => tv[p],
                    Err(_) => {
                        return Err(Error::NotSymmetric {
                            row: i,
                            col: j,
                            value: to_f64(v),
                            transpose: 0.0,
                        })
                    }
                };
                if (v - vt).abs() > tol * T::one().max(v.abs()) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        value: to_f64(v),
                        transpose: to_f64(vt),
                    });
                }
            }
        }
        Ok(())
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        if y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: y.len() });
        }
        self.spmv(x, y);
        Ok(())
    }

    #[inline]
    pub(crate) fn spmv(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = T::zero();
            for p in s..e {
                acc += self.vals[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    /// `y = A x` for a complex vector (A real).
    pub fn matvec_complex(&self, x: &[Complex<T>], y: &mut [Complex<T>]) -> Result<()> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len().min(y.len()) });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.col_idx[p]] * self.vals[p];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// Maximum absolute column sum (equal to the row sum for symmetric storage).
    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).1.iter().fold(T::zero(), |a, v| a + v.abs()))
            .fold(T::zero(), T::max)
    }

    /// `D A D` for a diagonal `D = diag(d)`; used for symmetric diagonal scaling.
    pub fn sym_diag_scale(&self, d: &[T]) -> Result<Self> {
        if d.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: d.len() });
        }
        let mut m = self.clone();
        for i in 0..self.n {
            for p in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.vals[p] = m.vals[p] * d[i] * d[m.col_idx[p]];
            }
        }
        Ok(m)
    }

    /// `self + s * other` on the union pattern.
    pub fn add_scaled(&self, s: T, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut t: Vec<(usize, usize, T)> = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, x)));
            let (c, v) = other.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, s * x)));
        }
        Self::from_triplets(self.n, &t)
    }

    /// Dense copy, guarded against accidental use on large matrices.
    pub fn to_dense(&self) -> Result<DenseSym<T>> {
        const LIMIT: usize = 5000;
        if self.n > LIMIT {
            return Err(Error::TooLarge { what: "dense dimension", value: self.n, limit: LIMIT });
        }
        let mut m = DenseSym::zeros(self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j <= i {
                    m.set(i, j, x);
                }
            }
        }
        Ok(m)
    }

    /// Lower-triangle triplets `(i, j, v)` with `j <= i`, row by row.
    pub fn lower_triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter()
                .zip(v)
                .take_while(move |(&j, _)| j <= i)
                .map(move |(&j, &x)| (i, j, x))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{dot, norm2, random_vector, rng_from_seed};
    use proptest::prelude::*;

    #[test]
    fn identity_matvec() {
        let a = CsrMatrix::<f64>::identity(3);
        assert_eq!(a.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn laplacian_row_sums() {
        let a = CsrMatrix::<f64>::tridiagonal(3, 2.0, -1.0);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let a = CsrMatrix::<f64>::identity(3);
        assert!(matches!(a.matvec(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn asymmetric_values_rejected() {
        let r = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 2.0)]);
        assert!(matches!(r, Err(Error::NotSymmetric { .. })));
        let r = CsrMatrix::from_triplets(2, &[(0, 1, 1.0)]);
        assert!(matches!(r, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn raw_arrays_validated() {
        assert!(CsrMatrix::<f64>::try_new(2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(CsrMatrix::<f64>::try_new(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::<f64>::try_new(1, vec![0, 1], vec![3], vec![1.0]).is_err());
    }

    fn random_symmetric(n: usize, seed: u64) -> CsrMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let r: Vec<f64> = random_vector(4 * n, &mut rng);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, r[i]));
            let j = ((r[n + i].abs() * n as f64) as usize).min(n - 1);
            t.push((i, j, r[2 * n + i]));
            t.push((j, i, r[2 * n + i]));
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    proptest! {
        #[test]
        fn matvec_is_linear_and_symmetric(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let m = random_symmetric(40, seed);
            let mut rng = rng_from_seed(seed + 1);
            let u: Vec<f64> = random_vector(40, &mut rng);
            let v: Vec<f64> = random_vector(40, &mut rng);
            let comb: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = m.matvec(&comb).unwrap();
            let mu = m.matvec(&u).unwrap();
            let mv = m.matvec(&v).unwrap();
            let rhs: Vec<f64> = mu.iter().zip(&mv).map(|(x, y)| a * x + b * y).collect();
            let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
            prop_assert!(norm2(&diff) <= 1e-13 * norm2(&lhs).max(1.0));
            let s = (dot(&u, &mv) - dot(&v, &mu)).abs();
            prop_assert!(s <= 1e-12 * norm2(&u) * norm2(&v) * m.norm1());
        }
    }
}
