//! Operator and solver contracts plus the built-in baseline implementations.
//!
//! Everything the eigensolvers touch goes through [`LinearOperator`],
//! [`Solver`] and [`ComplexSolver`], so matrix-free problems and external
//! factorizations plug in by implementing (or wrapping a closure in) these.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::scalar::Real;

pub mod cheb_approx;
pub mod factor;
pub mod ldl;
pub mod ordering;

pub use cheb_approx::{ls_pol_approx, ChebApprox, ChebSolver, ChebTarget};
pub use factor::{factor_shifted, factor_spd, ShiftedFactor, ShiftedSystem, SpdFactor};

/// `y = Op x` for a fixed real operator.
pub trait LinearOperator<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()>;
    /// Whether the operator is symmetric with respect to the Euclidean
    /// inner product. Only used for diagnostics.
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// `x = Op^{-1} b` for a real operator.
pub trait Solver<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn solve(&self, b: &[T], x: &mut [T]) -> Result<()>;
}

/// `x = Op^{-1} b` for a complex operator such as `A - sigma B`.
pub trait ComplexSolver<T>: Send + Sync {
    fn dim(&self) -> usize;
    fn solve(&self, b: &[Complex<T>], x: &mut [Complex<T>]) -> Result<()>;
}

pub(crate) fn check_dims(n: usize, a: usize, b: usize) -> Result<()> {
    if a != n {
        return Err(Error::DimensionMismatch { expected: n, got: a });
    }
    if b != n {
        return Err(Error::DimensionMismatch { expected: n, got: b });
    }
    Ok(())
}

impl<T: Real> LinearOperator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        self.matvec_into(x, y)
    }
}

impl<T, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        (**self).apply(x, y)
    }

    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
}

impl<T, S: Solver<T> + ?Sized> Solver<T> for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn solve(&self, b: &[T], x: &mut [T]) -> Result<()> {
        (**self).solve(b, x)
    }
}

/// Matrix-free operator backed by a closure.
pub struct FnOperator<F> {
    n: usize,
    symmetric: bool,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, symmetric: true, f }
    }

    pub fn nonsymmetric(n: usize, f: F) -> Self {
        Self { n, symmetric: false, f }
    }
}

impl<T, F> LinearOperator<T> for FnOperator<F>
where
    F: Fn(&[T], &mut [T]) -> Result<()> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.n, x.len(), y.len())?;
        (self.f)(x, y)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Solver backed by a closure.
pub struct FnSolver<F> {
    n: usize,
    f: F,
}

impl<F> FnSolver<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<T, F> Solver<T> for FnSolver<F>
where
    F: Fn(&[T], &mut [T]) -> Result<()> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, b: &[T], x: &mut [T]) -> Result<()> {
        check_dims(self.n, b.len(), x.len())?;
        (self.f)(b, x)
    }
}

/// Complex solver backed by a closure, for user-supplied `A - sigma B` solves.
pub struct FnComplexSolver<F> {
    n: usize,
    f: F,
}

impl<F> FnComplexSolver<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<T, F> ComplexSolver<T> for FnComplexSolver<F>
where
    F: Fn(&[Complex<T>], &mut [Complex<T>]) -> Result<()> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, b: &[Complex<T>], x: &mut [Complex<T>]) -> Result<()> {
        check_dims(self.n, b.len(), x.len())?;
        (self.f)(b, x)
    }
}

/// The identity, usable both as operator and as solver.
#[derive(Clone, Copy, Debug)]
pub struct Identity {
    pub n: usize,
}

impl<T: Real> LinearOperator<T> for Identity {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.n, x.len(), y.len())?;
        y.copy_from_slice(x);
        Ok(())
    }
}

impl<T: Real> Solver<T> for Identity {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve(&self, b: &[T], x: &mut [T]) -> Result<()> {
        check_dims(self.n, b.len(), x.len())?;
        x.copy_from_slice(b);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_operator() {
        let op = FnOperator::new(3, |x: &[f64], y: &mut [f64]| {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = 2.0 * xi;
            }
            Ok(())
        });
        let mut y = vec![0.0; 3];
        op.apply(&[1.0, 2.0, 3.0], &mut y).unwrap();
        assert_eq!(y, vec![2.0, 4.0, 6.0]);
        assert!(op.apply(&[1.0], &mut y).is_err());
    }

    #[test]
    fn identity_solver() {
        let mut x = vec![0.0; 2];
        Solver::<f64>::solve(&Identity { n: 2 }, &[3.0, 4.0], &mut x).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
    }
}
