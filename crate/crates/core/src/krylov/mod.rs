//! Orthogonalization, Lanczos recurrences and spectral bound estimation.

use std::time::Instant;

use crate::counters::{elapsed, OpCounters};
use crate::error::Result;
use crate::operators::{LinearOperator, Solver};
use crate::scalar::{lit, Real};
use crate::vector::{axpy, dot, norm2};

pub mod bounds;
pub mod lanczos;

pub use bounds::{lan_bounds, lan_tr_bounds, SpectralBounds};
pub use lanczos::{lanczos_run, Lanczos, LanczosState};

/// Inner product the Lanczos basis is orthonormal in.
///
/// Every basis vector `w` is kept together with its dual `z = M w`, where `M`
/// is the identity, `B` or `B^{-1}`, so inner products never need `M`:
/// `(w_i, w_j)_M = w_i^T z_j`. Vectors that live in the space of the
/// eigenvectors `x` of the pencil map to pairs as follows:
///
/// * `Euclidean`: `w = z = x`
/// * `B`: `w = x`, `z = B x` (pencil `(K, B)`)
/// * `BInverse`: `w = B x`, `z = x` (pencil `(K, B^{-1})`)
pub enum InnerProduct<'a, T> {
    Euclidean,
    B {
        b: &'a dyn LinearOperator<T>,
        b_solve: &'a dyn Solver<T>,
    },
    BInverse {
        b: &'a dyn LinearOperator<T>,
    },
}

impl<T: Real> InnerProduct<'_, T> {
    pub fn is_euclidean(&self) -> bool {
        matches!(self, InnerProduct::Euclidean)
    }

    fn b_apply(b: &dyn LinearOperator<T>, x: &[T], y: &mut [T], c: &mut OpCounters) -> Result<()> {
        let t = Instant::now();
        b.apply(x, y)?;
        c.b_matvec += 1;
        c.t_mv += elapsed(t);
        Ok(())
    }

    /// `(w, z)` pair for a vector of the eigenvector space.
    pub fn pair_from_x(&self, x: Vec<T>, c: &mut OpCounters) -> Result<(Vec<T>, Vec<T>)> {
        match self {
            InnerProduct::Euclidean => Ok((x.clone(), x)),
            InnerProduct::B { b, .. } => {
                let mut z = vec![T::zero(); x.len()];
                Self::b_apply(*b, &x, &mut z, c)?;
                Ok((x, z))
            }
            InnerProduct::BInverse { b } => {
                let mut w = vec![T::zero(); x.len()];
                Self::b_apply(*b, &x, &mut w, c)?;
                Ok((w, x))
            }
        }
    }

    /// `w = M^{-1} z`.
    pub fn primal_from_dual(&self, z: &[T], w: &mut [T], c: &mut OpCounters) -> Result<()> {
        match self {
            InnerProduct::Euclidean => {
                w.copy_from_slice(z);
                Ok(())
            }
            InnerProduct::B { b_solve, .. } => {
                let t = Instant::now();
                b_solve.solve(z, w)?;
                c.b_solve += 1;
                c.t_sv += elapsed(t);
                Ok(())
            }
            InnerProduct::BInverse { b } => Self::b_apply(*b, z, w, c),
        }
    }

    /// Whether eigenvectors are read off the `w` basis (else the `z` basis).
    pub fn x_from_w(&self) -> bool {
        !matches!(self, InnerProduct::BInverse { .. })
    }
}

/// Operator the Lanczos process runs on, self-adjoint in the active inner
/// product. `apply` receives the basis pair `(w, z)` and must return the dual
/// form of the product, i.e. `M (Op w)`; it may use whichever of `w` or `z` is
/// convenient.
pub trait KrylovOperator<T>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, w: &[T], z: &[T], out: &mut [T], c: &mut OpCounters) -> Result<()>;
}

/// Plain product with a matrix: `out = A w` (the dual form for the pencil
/// `(A, B)` under the `B` inner product, or for `A` itself when Euclidean).
pub struct PlainOperator<'a, T>(pub &'a dyn LinearOperator<T>);

impl<T: Real> KrylovOperator<T> for PlainOperator<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, w: &[T], _z: &[T], out: &mut [T], c: &mut OpCounters) -> Result<()> {
        let t = Instant::now();
        self.0.apply(w, out)?;
        c.a_matvec += 1;
        c.t_mv += elapsed(t);
        Ok(())
    }
}

/// Outcome of [`cgs2_orthogonalize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthResult<T> {
    /// Euclidean norm of the result; zero signals that the input lay in the span.
    pub norm: T,
    pub passes: usize,
}

/// DGKS threshold.
pub const ETA: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn cgs_pass<T: Real>(v: &mut [T], coef: &[&[T]], update: &[&[T]], h: &mut Vec<T>) {
    h.clear();
    h.extend(coef.iter().map(|q| dot(v, q)));
    for (&hj, u) in h.iter().zip(update) {
        axpy(-hj, u, v);
    }
}

/// Classical Gram-Schmidt with the DGKS correction: a second pass runs only
/// when the first one shrinks the norm below `ETA` times its input (or always,
/// with `force_second`).
///
/// Coefficients are `v . coef[i]` and updates use `update[i]`; pass the same
/// orthonormal set twice for the Euclidean case. A result below `1e-12` of the
/// input norm is treated as lying in the span and reported with `norm = 0`.
pub fn cgs2_orthogonalize<T: Real>(
    v: &mut [T],
    coef: &[&[T]],
    update: &[&[T]],
    force_second: bool,
) -> OrthResult<T> {
    debug_assert_eq!(coef.len(), update.len());
    let mut h = Vec::with_capacity(coef.len());
    let n0 = norm2(v);
    if coef.is_empty() || n0 == T::zero() {
        return OrthResult { norm: n0, passes: 0 };
    }
    cgs_pass(v, coef, update, &mut h);
    let mut n1 = norm2(v);
    let mut passes = 1;
    if force_second || n1 < lit::<T>(ETA) * n0 {
        cgs_pass(v, coef, update, &mut h);
        n1 = norm2(v);
        passes = 2;
    }
    if n1 <= lit::<T>(1e-12) * n0 {
        return OrthResult { norm: T::zero(), passes };
    }
    OrthResult { norm: n1, passes }
}
