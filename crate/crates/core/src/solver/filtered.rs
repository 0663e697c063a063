//! Filtered operators in the form the Lanczos engine consumes.
//!
//! Each `apply` returns the dual form `M (Op w)` (see
//! [`KrylovOperator`](crate::krylov::KrylovOperator)).

use crate::counters::OpCounters;
use crate::error::Result;
use crate::filter::{apply_pol, apply_pol_dual, apply_rat, apply_rat_generalized_with_bv, PolynomialFilter, RationalFilter};
use crate::krylov::KrylovOperator;
use crate::operators::{ComplexSolver, LinearOperator, Solver};
use crate::scalar::Real;

/// `rho(A_hat)` for the standard problem, Euclidean inner product.
pub struct PolyFilterOp<'a, T> {
    pub filter: &'a PolynomialFilter,
    pub a: &'a dyn LinearOperator<T>,
}

impl<T: Real> KrylovOperator<T> for PolyFilterOp<'_, T> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, w: &[T], _z: &[T], out: &mut [T], c: &mut OpCounters) -> Result<()> {
        apply_pol(self.filter, self.a, w, out, c)
    }
}

/// The pencil `(B rho(B^{-1} A_hat), B)` under the `B` inner product: the
/// product is `rho(A_hat B^{-1}) z` with `z = B w`.
pub struct PolyFilterOpB<'a, T> {
    pub filter: &'a PolynomialFilter,
    pub a: &'a dyn LinearOperator<T>,
    pub b_solve: &'a dyn Solver<T>,
}

impl<T: Real> KrylovOperator<T> for PolyFilterOpB<'_, T> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, w: &[T], z: &[T], out: &mut [T], c: &mut OpCounters) -> Result<()> {
        apply_pol_dual(self.filter, self.a, self.b_solve, w, z, out, c)
    }
}

/// `rho(A)` through shifted solves, Euclidean inner product.
pub struct RatFilterOp<'a, T> {
    pub filter: &'a RationalFilter,
    pub solvers: &'a [&'a dyn ComplexSolver<T>],
}

impl<T: Real> KrylovOperator<T> for RatFilterOp<'_, T> {
    fn dim(&self) -> usize {
        self.solvers.first().map_or(0, |s| s.dim())
    }

    fn apply(&self, w: &[T], _z: &[T], out: &mut [T], c: &mut OpCounters) -> Result<()> {
        apply_rat(self.filter, self.solvers, w, out, c)
    }
}

/// The pencil `(rho(B^{-1} A) B^{-1}, B^{-1})` under the `B^{-1}` inner
/// product: the product is `rho(B^{-1} A) z`, and `w = B z` supplies the
/// first product with `B` of every pole.
pub struct RatFilterOpB<'a, T> {
    pub filter: &'a RationalFilter,
    pub solvers: &'a [&'a dyn ComplexSolver<T>],
    pub b: &'a dyn LinearOperator<T>,
}

impl<T: Real> KrylovOperator<T> for RatFilterOpB<'_, T> {
    fn dim(&self) -> usize {
        self.b.dim()
    }

    fn apply(&self, w: &[T], z: &[T], out: &mut [T], c: &mut OpCounters) -> Result<()> {
        apply_rat_generalized_with_bv(self.filter, self.solvers, self.b, z, w, out, c)
    }
}
