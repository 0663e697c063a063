//! Baseline direct factorizations: SPD `B` and complex symmetric `A - sigma B`.

use std::sync::Arc;

use num_complex::Complex;

use super::ldl::{LdlFactor, Symbolic};
use super::{check_dims, ComplexSolver, Solver};
use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::scalar::{to_f64, Real};

/// Sparse Cholesky-type factor of an SPD matrix, `B = G G^T` with
/// `G = P L D^{1/2}`.
#[derive(Debug)]
pub struct SpdFactor<T> {
    ldl: LdlFactor<T>,
    sqrt_d: Vec<T>,
}

/// Factors an SPD matrix; fails with the offending index on a non-positive pivot.
pub fn factor_spd<T: Real>(b: &CsrMatrix<T>) -> Result<SpdFactor<T>> {
    let sym = Arc::new(Symbolic::new(b.n(), b.row_ptr().to_vec(), b.col_idx().to_vec()));
    let ldl = LdlFactor::factor(sym, b.values(), |index, d: T| {
        if d > T::zero() && d.is_finite() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite { index, pivot: to_f64(d) })
        }
    })?;
    let sqrt_d = ldl.pivots().iter().map(|d| d.sqrt()).collect();
    Ok(SpdFactor { ldl, sqrt_d })
}

impl<T: Real> SpdFactor<T> {
    pub fn n(&self) -> usize {
        self.ldl.n()
    }

    /// `G^{-1} v`.
    pub fn solve_l(&self, v: &[T], out: &mut [T]) -> Result<()> {
        check_dims(self.n(), v.len(), out.len())?;
        let mut xp = vec![T::zero(); self.n()];
        self.ldl.permute_in(v, &mut xp);
        self.ldl.l_solve(&mut xp);
        for (x, &s) in xp.iter_mut().zip(&self.sqrt_d) {
            *x /= s;
        }
        out.copy_from_slice(&xp);
        Ok(())
    }

    /// `G^{-T} v`.
    pub fn solve_lt(&self, v: &[T], out: &mut [T]) -> Result<()> {
        check_dims(self.n(), v.len(), out.len())?;
        let mut xp: Vec<T> = v.iter().zip(&self.sqrt_d).map(|(&x, &s)| x / s).collect();
        self.ldl.lt_solve(&mut xp);
        self.ldl.permute_out(&xp, out);
        Ok(())
    }

    /// `G v`.
    pub fn mul_g(&self, v: &[T], out: &mut [T]) -> Result<()> {
        check_dims(self.n(), v.len(), out.len())?;
        let mut xp: Vec<T> = v.iter().zip(&self.sqrt_d).map(|(&x, &s)| x * s).collect();
        self.ldl.l_mul(&mut xp);
        self.ldl.permute_out(&xp, out);
        Ok(())
    }

    /// `G^T v`.
    pub fn mul_gt(&self, v: &[T], out: &mut [T]) -> Result<()> {
        check_dims(self.n(), v.len(), out.len())?;
        let mut xp = vec![T::zero(); self.n()];
        self.ldl.permute_in(v, &mut xp);
        self.ldl.lt_mul(&mut xp);
        for ((o, x), &s) in out.iter_mut().zip(&xp).zip(&self.sqrt_d) {
            *o = *x * s;
        }
        Ok(())
    }
}

impl<T: Real> Solver<T> for SpdFactor<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[T], x: &mut [T]) -> Result<()> {
        check_dims(self.n(), b.len(), x.len())?;
        self.ldl.solve(b, x);
        Ok(())
    }
}

/// Union sparsity pattern of `A` and `B` (diagonal always present) with both
/// value arrays aligned to it; the symbolic analysis is shared by every pole.
#[derive(Debug)]
pub struct ShiftedSystem<T> {
    sym: Arc<Symbolic>,
    a_vals: Vec<T>,
    b_vals: Vec<T>,
}

impl<T: Real> ShiftedSystem<T> {
    /// `b = None` stands for the identity.
    pub fn new(a: &CsrMatrix<T>, b: Option<&CsrMatrix<T>>) -> Result<Self> {
        let n = a.n();
        if let Some(b) = b {
            if b.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: b.n() });
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(a.nnz() + n);
        let mut a_vals = Vec::with_capacity(a.nnz() + n);
        let mut b_vals = Vec::with_capacity(a.nnz() + n);
        row_ptr.push(0);
        let mut merged: Vec<(usize, T, T)> = Vec::new();
        for i in 0..n {
            merged.clear();
            let (ac, av) = a.row(i);
            merged.extend(ac.iter().zip(av).map(|(&j, &v)| (j, v, T::zero())));
            match b {
                Some(b) => {
                    let (bc, bv) = b.row(i);
                    merged.extend(bc.iter().zip(bv).map(|(&j, &v)| (j, T::zero(), v)));
                }
                None => merged.push((i, T::zero(), T::one())),
            }
            merged.push((i, T::zero(), T::zero()));
            merged.sort_by_key(|e| e.0);
            for &(j, va, vb) in &merged {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *a_vals.last_mut().unwrap() += va;
                    *b_vals.last_mut().unwrap() += vb;
                } else {
                    col_idx.push(j);
                    a_vals.push(va);
                    b_vals.push(vb);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let sym = Arc::new(Symbolic::new(n, row_ptr, col_idx));
        Ok(Self { sym, a_vals, b_vals })
    }

    pub fn n(&self) -> usize {
        self.sym.n()
    }

    /// Factors `A - sigma B`; requires `Im(sigma) != 0`.
    pub fn factor(&self, sigma: Complex<T>) -> Result<ShiftedFactor<T>> {
        if sigma.im == T::zero() {
            return Err(Error::InvalidArgument(
                "shift must have a nonzero imaginary part".into(),
            ));
        }
        let vals: Vec<Complex<T>> = self
            .a_vals
            .iter()
            .zip(&self.b_vals)
            .map(|(&a, &b)| Complex::new(a, T::zero()) - sigma * b)
            .collect();
        let ldl = LdlFactor::factor(self.sym.clone(), &vals, |index, d: Complex<T>| {
            let m = to_f64(d.norm());
            if m > 0.0 && m.is_finite() {
                Ok(())
            } else {
                Err(Error::SingularPivot { index, modulus: m })
            }
        })?;
        Ok(ShiftedFactor { sigma, ldl })
    }
}

/// Complex symmetric `LDL^T` factor of `A - sigma B` for one pole.
#[derive(Debug)]
pub struct ShiftedFactor<T> {
    sigma: Complex<T>,
    ldl: LdlFactor<Complex<T>>,
}

impl<T: Real> ShiftedFactor<T> {
    pub fn sigma(&self) -> Complex<T> {
        self.sigma
    }
}

impl<T: Real> ComplexSolver<T> for ShiftedFactor<T> {
    fn dim(&self) -> usize {
        self.ldl.n()
    }

    fn solve(&self, b: &[Complex<T>], x: &mut [Complex<T>]) -> Result<()> {
        check_dims(self.ldl.n(), b.len(), x.len())?;
        self.ldl.solve(b, x);
        Ok(())
    }
}

/// One-shot convenience wrapper around [`ShiftedSystem`].
pub fn factor_shifted<T: Real>(
    a: &CsrMatrix<T>,
    b: Option<&CsrMatrix<T>>,
    sigma: Complex<T>,
) -> Result<ShiftedFactor<T>> {
    ShiftedSystem::new(a, b)?.factor(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::gen_laplacian;
    use crate::vector::{complex_norm2, random_vector, rng_from_seed};

    #[test]
    fn factor_products_invert_the_solves() {
        let b = CsrMatrix::tridiagonal(30, 4.0, 1.0);
        let f = factor_spd(&b).unwrap();
        let v: Vec<f64> = random_vector(30, &mut rng_from_seed(2));
        let (mut g, mut back) = (vec![0.0; 30], vec![0.0; 30]);
        f.mul_g(&v, &mut g).unwrap();
        f.solve_l(&g, &mut back).unwrap();
        assert!(v.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-13));
        f.mul_gt(&v, &mut g).unwrap();
        f.solve_lt(&g, &mut back).unwrap();
        assert!(v.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-13));
        // G G^T = B
        let mut gt = vec![0.0; 30];
        f.mul_gt(&v, &mut gt).unwrap();
        f.mul_g(&gt, &mut g).unwrap();
        let bv = b.matvec(&v).unwrap();
        assert!(bv.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn identity_and_diagonal() {
        let f = factor_spd(&CsrMatrix::<f64>::identity(4)).unwrap();
        let mut x = vec![0.0; 4];
        f.solve(&[1.0, 2.0, 3.0, 4.0], &mut x).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
        let d = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let f = factor_spd(&d).unwrap();
        let mut x = vec![0.0; 5];
        f.solve(&[1.0; 5], &mut x).unwrap();
        for (i, v) in x.iter().enumerate() {
            assert!((v - 1.0 / (i as f64 + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn not_spd_reports_index() {
        let d = CsrMatrix::from_diagonal(&[1.0, 2.0, -3.0]);
        match factor_spd(&d) {
            Err(Error::NotPositiveDefinite { index: 2, .. }) => {}
            r => panic!("unexpected {r:?}"),
        }
    }

    #[test]
    fn half_solves_compose_to_inverse() {
        let b = CsrMatrix::tridiagonal(100, 2.0 / 3.0, 1.0 / 6.0);
        let f = factor_spd(&b).unwrap();
        let v: Vec<f64> = random_vector(100, &mut rng_from_seed(1));
        let mut t = vec![0.0; 100];
        let mut x = vec![0.0; 100];
        f.solve_l(&v, &mut t).unwrap();
        f.solve_lt(&t, &mut x).unwrap();
        let mut y = vec![0.0; 100];
        f.solve(&v, &mut y).unwrap();
        for (a, c) in x.iter().zip(&y) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_scalar_division() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let f = factor_shifted(&a, None, Complex::new(0.0, 1.0)).unwrap();
        let one = Complex::new(1.0, 0.0);
        let z = Complex::new(0.0, 0.0);
        let mut x = vec![z; 3];
        f.solve(&[z, one, z], &mut x).unwrap();
        let want = one / Complex::new(2.0, -1.0);
        assert!((x[1] - want).norm() < 1e-15);
        assert!(x[0].norm() == 0.0 && x[2].norm() == 0.0);
    }

    #[test]
    fn real_shift_rejected() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!(factor_shifted(&a, None, Complex::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn shifted_residual_and_conjugate_symmetry() {
        let a = gen_laplacian::<f64>(&[30, 30]).unwrap();
        let n = a.n();
        let sys = ShiftedSystem::new(&a, None).unwrap();
        let s = Complex::new(0.5, 0.3);
        let f = sys.factor(s).unwrap();
        let fc = sys.factor(s.conj()).unwrap();
        let mut rng = rng_from_seed(5);
        let re: Vec<f64> = random_vector(n, &mut rng);
        let im: Vec<f64> = random_vector(n, &mut rng);
        let b: Vec<Complex<f64>> = re.iter().zip(&im).map(|(&x, &y)| Complex::new(x, y)).collect();
        let mut x = vec![Complex::new(0.0, 0.0); n];
        f.solve(&b, &mut x).unwrap();
        let mut ax = vec![Complex::new(0.0, 0.0); n];
        a.matvec_complex(&x, &mut ax).unwrap();
        let r: Vec<Complex<f64>> = ax.iter().zip(&x).zip(&b).map(|((p, q), c)| p - s * q - c).collect();
        assert!(complex_norm2(&r) <= 1e-8 * complex_norm2(&b));
        let bc: Vec<Complex<f64>> = b.iter().map(|z| z.conj()).collect();
        let mut xc = vec![Complex::new(0.0, 0.0); n];
        fc.solve(&bc, &mut xc).unwrap();
        for (p, q) in x.iter().zip(&xc) {
            assert!((p.conj() - q).norm() <= 1e-12 * p.norm().max(1.0));
        }
    }
}
