#![allow(dead_code)]

use sliceeig::filter::{factor_poles, find_pol, find_ratf, PolyOptions, PolynomialFilter, RatOptions, RationalFilter};
use sliceeig::krylov::SpectralBounds;
use sliceeig::matrix::CsrMatrix;
use sliceeig::operators::{ShiftedFactor, ShiftedSystem};

/// Eigenvalues of the Dirichlet finite-difference Laplacian on a grid, from
/// the tensor-product formula, ascending.
pub fn laplacian_oracle(dims: &[usize]) -> Vec<f64> {
    let mut eigs = vec![0.0];
    for &d in dims {
        let one: Vec<f64> = (1..=d)
            .map(|j| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (d as f64 + 1.0)).cos())
            .collect();
        eigs = eigs.iter().flat_map(|e| one.iter().map(move |o| e + o)).collect();
    }
    eigs.sort_by(f64::total_cmp);
    eigs
}

pub fn within(eigs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    eigs.iter().copied().filter(|&e| e >= lo && e <= hi).collect()
}

pub fn padded_bounds(eigs: &[f64]) -> SpectralBounds {
    SpectralBounds::new(eigs[0] - 1e-3, eigs[eigs.len() - 1] + 1e-3).unwrap()
}

/// Checks that `found` and `oracle` (both ascending) match one to one.
pub fn same_set(found: &[f64], oracle: &[f64], tol: f64) -> Result<(), String> {
    if found.len() != oracle.len() {
        return Err(format!("found {} eigenvalues, oracle has {}", found.len(), oracle.len()));
    }
    for (i, (f, o)) in found.iter().zip(oracle).enumerate() {
        if (f - o).abs() > tol {
            return Err(format!("eigenvalue {i}: found {f}, oracle {o}"));
        }
    }
    Ok(())
}

pub fn poly_filter(lo: f64, hi: f64, bounds: &SpectralBounds) -> PolynomialFilter {
    find_pol(lo, hi, bounds, &PolyOptions::default()).unwrap()
}

pub fn rat_filter(a: &CsrMatrix<f64>, b: Option<&CsrMatrix<f64>>, lo: f64, hi: f64, opts: &RatOptions) -> (RationalFilter, Vec<ShiftedFactor<f64>>) {
    let f = find_ratf(lo, hi, opts).unwrap();
    let sys = ShiftedSystem::new(a, b).unwrap();
    let facs = factor_poles(&sys, &f).unwrap();
    (f, facs)
}

/// Generalized eigenvalues of the linear finite-element pencil on a uniform
/// 1-D mesh, `tridiag(-1, 2, -1)` against `s * tridiag(1/6, 2/3, 1/6)`.
pub fn fem_pencil_oracle(n: usize, s: f64) -> Vec<f64> {
    let mut e: Vec<f64> = (1..=n)
        .map(|j| {
            let c = (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            (2.0 - 2.0 * c) / (s * (4.0 + 2.0 * c) / 6.0)
        })
        .collect();
    e.sort_by(f64::total_cmp);
    e
}
