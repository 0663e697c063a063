//! Filtered projection eigensolvers for one spectral slice.

use num_complex::Complex;
use serde::Serialize;

use crate::counters::OpCounters;
use crate::error::{Error, Result};
use crate::operators::{check_dims, ComplexSolver, LinearOperator, Solver, SpdFactor};
use crate::scalar::{to_f64, Real};
use crate::vector::{dot, norm2};

pub mod filtered;
mod lanczos;
mod subspace;

pub use filtered::{PolyFilterOp, PolyFilterOpB, RatFilterOp, RatFilterOpB};
pub use lanczos::{cheb_lan_nr, cheb_lan_tr, rat_lan_nr, rat_lan_tr};
pub use subspace::cheb_si;

/// Driver parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Restart dimension of the thick-restart drivers.
    pub m: usize,
    /// Cap on filter applications (Lanczos steps or block iterations).
    pub max_its: usize,
    /// Period, in steps, of the Ritz-sum stagnation check.
    pub ncycle: usize,
    /// Stagnation tolerance `max(tau1_abs, tau1_rel * |tnew|)`.
    pub tau1_rel: f64,
    pub tau1_abs: f64,
    pub res_tol: f64,
    pub seed: u64,
}

impl SolverConfig {
    /// Defaults scaled by an estimate of the eigenvalue count in the slice.
    pub fn for_estimate(est_count: usize) -> Self {
        Self {
            m: (4 * est_count).max(80),
            max_its: 40 * est_count + 300,
            ncycle: 30,
            tau1_rel: 1e-10,
            tau1_abs: 1e-12,
            res_tol: 1e-8,
            seed: 0,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.m < 4 || self.ncycle < 1 || self.max_its < 1 || !(self.res_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "solver config needs m >= 4, ncycle >= 1, max_its >= 1, res_tol > 0 (got {}, {}, {}, {})",
                self.m, self.ncycle, self.max_its, self.res_tol
            )));
        }
        Ok(())
    }

    pub(crate) fn tau1(&self, tnew: f64) -> f64 {
        self.tau1_abs.max(self.tau1_rel * tnew.abs())
    }

    pub(crate) fn converged(&self, lambda: f64, res: f64) -> bool {
        res <= self.res_tol * lambda.abs().max(1.0)
    }

    pub(crate) fn in_interval(&self, lambda: f64, (lo, hi): (f64, f64)) -> bool {
        let s = 10.0 * self.res_tol;
        lambda >= lo - s * lo.abs().max(1.0) && lambda <= hi + s * hi.abs().max(1.0)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::for_estimate(0)
    }
}

/// Ritz pair of the filtered operator together with its Rayleigh quotient for
/// the original pencil.
#[derive(Clone, Debug, PartialEq)]
pub struct RitzPair<T> {
    pub theta: T,
    pub lambda: T,
    pub u: Vec<T>,
    pub residual: T,
}

/// Converged vectors every new direction is orthogonalized against:
/// orthonormal, or `B`-orthonormal for a pencil.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeflationSet<T> {
    pub vectors: Vec<Vec<T>>,
    pub values: Vec<T>,
}

impl<T: Real> DeflationSet<T> {
    pub fn from_results(r: &EigenResults<T>) -> Self {
        Self { vectors: r.eigenvectors.clone(), values: r.eigenvalues.clone() }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `max |U^T M U - I|` with `M = B` or the identity.
    pub fn orthonormality_error(&self, b: Option<&dyn LinearOperator<T>>) -> Result<f64> {
        orthonormality_error(&self.vectors, b)
    }
}

pub(crate) fn orthonormality_error<T: Real>(u: &[Vec<T>], b: Option<&dyn LinearOperator<T>>) -> Result<f64> {
    let mu: Vec<Vec<T>> = match b {
        None => u.to_vec(),
        Some(b) => u
            .iter()
            .map(|x| {
                let mut y = vec![T::zero(); x.len()];
                b.apply(x, &mut y).map(|_| y)
            })
            .collect::<Result<_>>()?,
    };
    let mut worst = 0.0f64;
    for (i, x) in u.iter().enumerate() {
        for (j, y) in mu.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((to_f64(dot(x, y)) - want).abs());
        }
    }
    Ok(worst)
}

/// Operation counts and timings of one driver run, in the columns of the
/// usual eigensolver reports. Times are in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub niter: usize,
    pub n_a_matvec: u64,
    pub n_b_matvec: u64,
    pub n_b_solve: u64,
    pub n_shift_solve: u64,
    pub t_mv: f64,
    pub t_orth: f64,
    pub t_sv: f64,
    pub t_total: f64,
    /// Thick-restart cycles, or Lanczos passes of the non-restarted drivers.
    pub cycles: usize,
}

impl SolveStats {
    pub(crate) fn from_counters(niter: usize, c: &OpCounters, t_total: f64, cycles: usize) -> Self {
        Self {
            niter,
            n_a_matvec: c.a_matvec,
            n_b_matvec: c.b_matvec,
            n_b_solve: c.b_solve,
            n_shift_solve: c.shift_solve,
            t_mv: c.t_mv,
            t_orth: c.t_orth,
            t_sv: c.t_sv,
            t_total,
            cycles,
        }
    }
}

/// Eigenpairs of one slice, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResults<T> {
    pub eigenvalues: Vec<T>,
    /// Unit (or unit `B`-norm) eigenvectors.
    pub eigenvectors: Vec<Vec<T>>,
    /// `||A u - lambda B u||_2`.
    pub residuals: Vec<T>,
    /// Ritz values of the filtered operator the pairs were found at.
    pub theta: Vec<T>,
    pub stats: SolveStats,
    /// `false` when the iteration cap stopped the run with candidates left
    /// unconverged; the pairs returned are still converged.
    pub complete: bool,
}

impl<T: Real> EigenResults<T> {
    pub(crate) fn from_pairs(mut pairs: Vec<RitzPair<T>>, stats: SolveStats, complete: bool) -> Self {
        pairs.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap_or(std::cmp::Ordering::Equal));
        let mut r = Self {
            eigenvalues: Vec::with_capacity(pairs.len()),
            eigenvectors: Vec::with_capacity(pairs.len()),
            residuals: Vec::with_capacity(pairs.len()),
            theta: Vec::with_capacity(pairs.len()),
            stats,
            complete,
        };
        for p in pairs {
            r.eigenvalues.push(p.lambda);
            r.eigenvectors.push(p.u);
            r.residuals.push(p.residual);
            r.theta.push(p.theta);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// The matrices a driver works with: `A`, optionally `B` with a solver for
/// it, and optionally vectors to deflate from the start.
#[derive(Clone, Copy)]
pub struct Problem<'a, T> {
    pub a: &'a dyn LinearOperator<T>,
    pub b: Option<&'a dyn LinearOperator<T>>,
    pub b_solve: Option<&'a dyn Solver<T>>,
    pub locked: Option<&'a DeflationSet<T>>,
}

impl<'a, T: Real> Problem<'a, T> {
    pub fn standard(a: &'a dyn LinearOperator<T>) -> Self {
        Self { a, b: None, b_solve: None, locked: None }
    }

    /// Pencil `(A, B)`. The polynomial drivers need `b_solve`; the rational
    /// ones only multiply with `B`.
    pub fn generalized(a: &'a dyn LinearOperator<T>, b: &'a dyn LinearOperator<T>, b_solve: Option<&'a dyn Solver<T>>) -> Self {
        Self { a, b: Some(b), b_solve, locked: None }
    }

    pub fn with_locked(mut self, locked: &'a DeflationSet<T>) -> Self {
        self.locked = Some(locked);
        self
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.n();
        if let Some(b) = self.b {
            check_dims(n, b.dim(), n)?;
        }
        if let Some(s) = self.b_solve {
            check_dims(n, s.dim(), n)?;
        }
        if let Some(l) = self.locked {
            for v in &l.vectors {
                check_dims(n, v.len(), n)?;
            }
        }
        Ok(())
    }
}

/// Rayleigh quotient and residual of `u` for `A` (or the pencil `(A, B)`):
/// `lambda = u^T A u / u^T B u`, `r = ||A u - lambda B u||_2`.
pub fn rayleigh_and_residual<T: Real>(
    a: &dyn LinearOperator<T>,
    b: Option<&dyn LinearOperator<T>>,
    u: &[T],
) -> Result<(T, T)> {
    let mut bu = vec![T::zero(); u.len()];
    match b {
        Some(b) => b.apply(u, &mut bu)?,
        None => bu.copy_from_slice(u),
    }
    let mut c = OpCounters::default();
    rayleigh_with_bu(a, u, &bu, &mut c)
}

pub(crate) fn rayleigh_with_bu<T: Real>(a: &dyn LinearOperator<T>, u: &[T], bu: &[T], c: &mut OpCounters) -> Result<(T, T)> {
    let ubu = dot(u, bu);
    if !(ubu > T::zero()) {
        return Err(Error::InvalidArgument("Rayleigh quotient of a zero vector".into()));
    }
    let mut au = vec![T::zero(); u.len()];
    let t = std::time::Instant::now();
    a.apply(u, &mut au)?;
    c.a_matvec += 1;
    c.t_mv += crate::counters::elapsed(t);
    let lambda = dot(u, &au) / ubu;
    for (x, y) in au.iter_mut().zip(bu) {
        *x -= lambda * *y;
    }
    Ok((lambda, norm2(&au)))
}

/// The standard-form operator `G^{-1} A G^{-T}` of the pencil `(A, B)` with
/// `B = G G^T`, applied without forming the product. Its eigenvectors `y` map
/// back to those of the pencil by `x = G^{-T} y`.
pub struct CholeskyTransform<'a, T> {
    a: &'a dyn LinearOperator<T>,
    g: &'a SpdFactor<T>,
}

pub fn transform_with_cholesky<'a, T: Real>(a: &'a dyn LinearOperator<T>, g: &'a SpdFactor<T>) -> Result<CholeskyTransform<'a, T>> {
    check_dims(a.dim(), g.n(), a.dim())?;
    Ok(CholeskyTransform { a, g })
}

impl<T: Real> LinearOperator<T> for CholeskyTransform<'_, T> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        let n = self.dim();
        check_dims(n, x.len(), y.len())?;
        let mut t1 = vec![T::zero(); n];
        let mut t2 = vec![T::zero(); n];
        self.g.solve_lt(x, &mut t1)?;
        self.a.apply(&t1, &mut t2)?;
        self.g.solve_l(&t2, y)
    }
}

impl<'a, T: Real> CholeskyTransform<'a, T> {
    /// `x = G^{-T} y`.
    pub fn back_map(&self, y: &[T]) -> Result<Vec<T>> {
        let mut x = vec![T::zero(); y.len()];
        self.g.solve_lt(y, &mut x)?;
        Ok(x)
    }

    /// Maps every eigenvector of a result computed on the transformed
    /// operator back to the pencil.
    pub fn back_map_results(&self, r: &mut EigenResults<T>) -> Result<()> {
        for v in r.eigenvectors.iter_mut() {
            *v = self.back_map(v)?;
        }
        Ok(())
    }

    /// Solver for `G^{-1} A G^{-T} - sigma I` built from one for `A - sigma B`:
    /// its inverse is `G^T (A - sigma B)^{-1} G`.
    pub fn shifted_solver(&self, inner: &'a dyn ComplexSolver<T>) -> TransformedShiftSolver<'a, T> {
        TransformedShiftSolver { inner, g: self.g }
    }
}

pub struct TransformedShiftSolver<'a, T> {
    inner: &'a dyn ComplexSolver<T>,
    g: &'a SpdFactor<T>,
}

impl<T: Real> ComplexSolver<T> for TransformedShiftSolver<'_, T> {
    fn dim(&self) -> usize {
        self.g.n()
    }

    fn solve(&self, b: &[Complex<T>], x: &mut [Complex<T>]) -> Result<()> {
        let n = self.dim();
        check_dims(n, b.len(), x.len())?;
        let (re, im): (Vec<T>, Vec<T>) = b.iter().map(|z| (z.re, z.im)).unzip();
        let (mut gr, mut gi) = (vec![T::zero(); n], vec![T::zero(); n]);
        self.g.mul_g(&re, &mut gr)?;
        self.g.mul_g(&im, &mut gi)?;
        let rhs: Vec<Complex<T>> = gr.iter().zip(&gi).map(|(&r, &i)| Complex::new(r, i)).collect();
        let mut y = vec![Complex::new(T::zero(), T::zero()); n];
        self.inner.solve(&rhs, &mut y)?;
        let (re, im): (Vec<T>, Vec<T>) = y.iter().map(|z| (z.re, z.im)).unzip();
        self.g.mul_gt(&re, &mut gr)?;
        self.g.mul_gt(&im, &mut gi)?;
        for ((o, r), i) in x.iter_mut().zip(gr).zip(gi) {
            *o = Complex::new(r, i);
        }
        Ok(())
    }
}
