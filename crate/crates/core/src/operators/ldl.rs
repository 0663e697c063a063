//! Up-looking sparse `LDL^T` factorization (elimination-tree based), generic
//! over real and complex entries. No pivoting: callers supply matrices whose
//! pivots stay away from zero (SPD matrices, or `A - sigma B` with
//! `Im(sigma) != 0`).

use std::ops::Neg;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::NumAssign;

use super::ordering::rcm_order;
use crate::error::Result;
use crate::scalar::{to_f64, Real};

/// Scalar field the factorization runs over.
pub trait Field: NumAssign + Neg<Output = Self> + Copy + Send + Sync + 'static {
    fn modulus(self) -> f64;
}

impl<T: Real> Field for T {
    fn modulus(self) -> f64 {
        to_f64(self.abs())
    }
}

impl<T: Real> Field for Complex<T> {
    fn modulus(self) -> f64 {
        to_f64(self.norm())
    }
}

/// Fill-reducing ordering plus elimination tree and column counts of `L`.
/// Depends only on the sparsity pattern, so one instance can serve many
/// numeric factorizations (one per pole).
#[derive(Debug)]
pub struct Symbolic {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Symbolic {
    /// `row_ptr`/`col_idx` describe a structurally symmetric pattern in full storage.
    pub fn new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        let perm = rcm_order(n, &row_ptr, &col_idx);
        let mut pinv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let kk = perm[k];
            for &c in &col_idx[row_ptr[kk]..row_ptr[kk + 1]] {
                let mut i = pinv[c];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        Self { n, row_ptr, col_idx, perm, pinv, parent, lp }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of strictly lower entries of `L`.
    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
}

/// Numeric factor `P^T M P = L D L^T` with unit lower triangular `L`.
#[derive(Debug)]
pub struct LdlFactor<F> {
    sym: Arc<Symbolic>,
    li: Vec<usize>,
    lx: Vec<F>,
    d: Vec<F>,
}

impl<F: Field> LdlFactor<F> {
    /// Factors the matrix whose values (aligned with the symbolic pattern) are
    /// `vals`. `check(k, d_k)` runs on every pivot before it is used and may
    /// reject it; `k` is the index in the original numbering.
    pub fn factor(sym: Arc<Symbolic>, vals: &[F], mut check: impl FnMut(usize, F) -> Result<()>) -> Result<Self> {
        let n = sym.n;
        let nl = sym.nnz_l();
        let mut li = vec![0usize; nl];
        let mut lx = vec![F::zero(); nl];
        let mut d = vec![F::zero(); n];
        let mut y = vec![F::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            y[k] = F::zero();
            let mut top = n;
            flag[k] = k;
            let kk = sym.perm[k];
            for p in sym.row_ptr[kk]..sym.row_ptr[kk + 1] {
                let mut i = sym.pinv[sym.col_idx[p]];
                if i <= k {
                    y[i] += vals[p];
                    let mut len = 0;
                    while flag[i] != k {
                        pattern[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = sym.parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        pattern[top] = pattern[len];
                    }
                }
            }
            let mut dk = y[k];
            y[k] = F::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = F::zero();
                let p2 = sym.lp[i] + lnz[i];
                for p in sym.lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                dk -= l_ki * yi;
                li[p2] = k;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            check(kk, dk)?;
            d[k] = dk;
        }
        Ok(Self { sym, li, lx, d })
    }

    pub fn n(&self) -> usize {
        self.sym.n
    }

    pub fn pivots(&self) -> &[F] {
        &self.d
    }

    /// `x <- P^T x` into a permuted work vector.
    pub(crate) fn permute_in(&self, b: &[F], xp: &mut [F]) {
        for (k, x) in xp.iter_mut().enumerate() {
            *x = b[self.sym.perm[k]];
        }
    }

    pub(crate) fn permute_out(&self, xp: &[F], x: &mut [F]) {
        for (k, &v) in xp.iter().enumerate() {
            x[self.sym.perm[k]] = v;
        }
    }

    /// In-place `L^{-1}` on permuted coordinates.
    pub(crate) fn l_solve(&self, x: &mut [F]) {
        for j in 0..self.sym.n {
            let xj = x[j];
            if xj == F::zero() {
                continue;
            }
            for p in self.sym.lp[j]..self.sym.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
    }

    /// In-place `L^{-T}` on permuted coordinates.
    pub(crate) fn lt_solve(&self, x: &mut [F]) {
        for j in (0..self.sym.n).rev() {
            let mut xj = x[j];
            for p in self.sym.lp[j]..self.sym.lp[j + 1] {
                xj -= self.lx[p] * x[self.li[p]];
            }
            x[j] = xj;
        }
    }

    /// In-place `L x` on permuted coordinates.
    pub(crate) fn l_mul(&self, x: &mut [F]) {
        for j in (0..self.sym.n).rev() {
            let xj = x[j];
            for p in self.sym.lp[j]..self.sym.lp[j + 1] {
                x[self.li[p]] += self.lx[p] * xj;
            }
        }
    }

    /// In-place `L^T x` on permuted coordinates.
    pub(crate) fn lt_mul(&self, x: &mut [F]) {
        for j in 0..self.sym.n {
            let mut xj = x[j];
            for p in self.sym.lp[j]..self.sym.lp[j + 1] {
                xj += self.lx[p] * x[self.li[p]];
            }
            x[j] = xj;
        }
    }

    /// Full solve `M x = b`.
    pub fn solve(&self, b: &[F], x: &mut [F]) {
        let mut xp = vec![F::zero(); self.sym.n];
        self.permute_in(b, &mut xp);
        self.l_solve(&mut xp);
        for (v, &dk) in xp.iter_mut().zip(&self.d) {
            *v /= dk;
        }
        self.lt_solve(&mut xp);
        self.permute_out(&xp, x);
    }
}
