//! Finite-difference Laplacians on regular grids and their closed-form spectra.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

use super::csr::CsrMatrix;

const MAX_GRID_POINTS: usize = 1 << 31;
const MAX_ANALYTIC: usize = 10_000_000;

fn grid_size(dims: &[usize], limit: usize) -> Result<usize> {
    if dims.is_empty() || dims.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "grid must have 1 to 3 dimensions, got {}",
            dims.len()
        )));
    }
    let mut n = 1usize;
    for &d in dims {
        if d == 0 {
            return Err(Error::InvalidArgument("grid sizes must be positive".into()));
        }
        n = n
            .checked_mul(d)
            .filter(|&n| n <= limit)
            .ok_or(Error::TooLarge { what: "grid points", value: usize::MAX, limit })?;
    }
    Ok(n)
}

/// Negative Laplacian with Dirichlet boundaries: `2 * dims.len()` on the
/// diagonal and `-1` for each grid neighbour (3, 5 or 7-point stencil).
///
/// Points are numbered with the first dimension varying fastest.
pub fn gen_laplacian<T: Real>(dims: &[usize]) -> Result<CsrMatrix<T>> {
    let n = grid_size(dims, MAX_GRID_POINTS)?;
    let nx = dims[0];
    let ny = dims.get(1).copied().unwrap_or(1);
    let nz = dims.get(2).copied().unwrap_or(1);
    let diag = from_usize::<T>(2 * dims.len());
    let off = -T::one();
    let sy = nx;
    let sz = nx * ny;

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * (2 * dims.len() + 1));
    let mut vals = Vec::with_capacity(col_idx.capacity());
    row_ptr.push(0);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let row = i + sy * j + sz * k;
                let mut push = |c: usize, v: T| {
                    col_idx.push(c);
                    vals.push(v);
                };
                if k > 0 {
                    push(row - sz, off);
                }
                if j > 0 {
                    push(row - sy, off);
                }
                if i > 0 {
                    push(row - 1, off);
                }
                push(row, diag);
                if i + 1 < nx {
                    push(row + 1, off);
                }
                if j + 1 < ny {
                    push(row + sy, off);
                }
                if k + 1 < nz {
                    push(row + sz, off);
                }
                row_ptr.push(col_idx.len());
            }
        }
    }
    CsrMatrix::try_new(n, row_ptr, col_idx, vals)
}

/// All eigenvalues of [`gen_laplacian`], ascending:
/// `sum_d 4 sin^2(i_d pi / (2 (n_d + 1)))`.
pub fn laplacian_analytic_eigs<T: Real>(dims: &[usize]) -> Result<Vec<T>> {
    grid_size(dims, MAX_ANALYTIC)?;
    let mut eigs = vec![0.0f64];
    for &nd in dims {
        let part: Vec<f64> = (1..=nd)
            .map(|i| {
                let s = (i as f64 * std::f64::consts::PI / (2.0 * (nd as f64 + 1.0))).sin();
                4.0 * s * s
            })
            .collect();
        eigs = eigs
            .iter()
            .flat_map(|&e| part.iter().map(move |&p| e + p))
            .collect();
    }
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs.into_iter().map(lit).collect())
}
