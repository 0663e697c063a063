//! Chebyshev least-squares approximations of `t^{-1}` and `t^{-1/2}` on the
//! spectrum of an SPD matrix, giving solves with `B` (and `B^{1/2}`) from
//! matrix-vector products alone.

use std::f64::consts::PI;

use super::{check_dims, LinearOperator, Solver};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::vector::axpy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChebTarget {
    /// `f(t) = 1/t`
    Inverse,
    /// `f(t) = 1/sqrt(t)`
    InverseSqrt,
}

impl ChebTarget {
    fn eval(self, t: f64) -> f64 {
        match self {
            ChebTarget::Inverse => 1.0 / t,
            ChebTarget::InverseSqrt => 1.0 / t.sqrt(),
        }
    }
}

/// Polynomial `p(t) = sum_j c_j T_j((t - center) / half_width)`.
#[derive(Clone, Debug)]
pub struct ChebApprox<T> {
    pub target: ChebTarget,
    pub lmin: f64,
    pub lmax: f64,
    coeffs: Vec<T>,
    /// Relative max error measured on the check grid.
    pub error: f64,
}

const CHECK_POINTS: usize = 1000;

/// Smallest-degree fit with relative uniform error at most `tol` on
/// `[lmin, lmax]`, coefficients from discrete least squares on
/// `4 * max_deg` Chebyshev nodes.
pub fn ls_pol_approx<T: Real>(
    target: ChebTarget,
    lmin: f64,
    lmax: f64,
    tol: f64,
    max_deg: usize,
) -> Result<ChebApprox<T>> {
    if !(lmin > 0.0) || !(lmax >= lmin) || !lmax.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lmin <= lmax, got [{lmin}, {lmax}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let c = 0.5 * (lmax + lmin);
    let h = 0.5 * (lmax - lmin);
    if h <= 1e-12 * lmax {
        return Ok(ChebApprox { target, lmin, lmax, coeffs: vec![lit(target.eval(c))], error: 0.0 });
    }

    let nodes = 4 * max_deg.max(1);
    let fx: Vec<f64> = (0..nodes)
        .map(|i| target.eval(c + h * (PI * (i as f64 + 0.5) / nodes as f64).cos()))
        .collect();
    let coeff = |j: usize| -> f64 {
        let s: f64 = fx
            .iter()
            .enumerate()
            .map(|(i, f)| f * (j as f64 * PI * (i as f64 + 0.5) / nodes as f64).cos())
            .sum();
        if j == 0 {
            s / nodes as f64
        } else {
            2.0 * s / nodes as f64
        }
    };

    let grid: Vec<f64> = (0..=CHECK_POINTS)
        .map(|i| -1.0 + 2.0 * i as f64 / CHECK_POINTS as f64)
        .collect();
    let fg: Vec<f64> = grid.iter().map(|&x| target.eval(c + h * x)).collect();
    let fmax = fg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut t_prev = vec![1.0; grid.len()];
    let mut t_cur = grid.clone();
    let mut sum = vec![0.0; grid.len()];
    let mut coeffs = Vec::new();
    let mut best = f64::INFINITY;
    for k in 0..=max_deg {
        let ck = coeff(k);
        coeffs.push(ck);
        if k == 0 {
            for s in sum.iter_mut() {
                *s += ck;
            }
        } else {
            if k >= 2 {
                for ((x, tp), tc) in grid.iter().zip(t_prev.iter_mut()).zip(t_cur.iter_mut()) {
                    let next = 2.0 * x * *tc - *tp;
                    *tp = *tc;
                    *tc = next;
                }
            }
            for (s, tc) in sum.iter_mut().zip(&t_cur) {
                *s += ck * tc;
            }
        }
        let err = sum.iter().zip(&fg).fold(0.0f64, |m, (p, f)| m.max((p - f).abs())) / fmax;
        best = best.min(err);
        if err <= tol {
            return Ok(ChebApprox {
                target,
                lmin,
                lmax,
                coeffs: coeffs.into_iter().map(lit).collect(),
                error: err,
            });
        }
    }
    Err(Error::ApproximationFailed { tol, max_deg, achieved: best })
}

impl<T: Real> ChebApprox<T> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    fn map(&self) -> (T, T) {
        (lit(0.5 * (self.lmax + self.lmin)), lit(0.5 * (self.lmax - self.lmin)))
    }

    /// Evaluates the polynomial at a scalar `t`.
    pub fn eval(&self, t: T) -> T {
        if self.coeffs.len() == 1 {
            return self.coeffs[0];
        }
        let (c, h) = self.map();
        let x = (t - c) / h;
        let mut tp = T::one();
        let mut tc = x;
        let mut s = self.coeffs[0] + self.coeffs[1] * x;
        for &ck in &self.coeffs[2..] {
            let next = lit::<T>(2.0) * x * tc - tp;
            tp = tc;
            tc = next;
            s += ck * tc;
        }
        s
    }

    /// `out = p(B) v` by the three-term recurrence; costs `degree` products with `B`.
    pub fn apply(&self, b: &dyn LinearOperator<T>, v: &[T], out: &mut [T]) -> Result<()> {
        let n = v.len();
        check_dims(b.dim(), n, out.len())?;
        for (o, &x) in out.iter_mut().zip(v) {
            *o = self.coeffs[0] * x;
        }
        if self.coeffs.len() == 1 {
            return Ok(());
        }
        let (c, h) = self.map();
        let two = lit::<T>(2.0);
        let mut prev = v.to_vec();
        let mut cur = vec![T::zero(); n];
        let mut tmp = vec![T::zero(); n];
        b.apply(v, &mut cur)?;
        for (y, &x) in cur.iter_mut().zip(v) {
            *y = (*y - c * x) / h;
        }
        axpy(self.coeffs[1], &cur, out);
        for &ck in &self.coeffs[2..] {
            b.apply(&cur, &mut tmp)?;
            for ((t, &y), p) in tmp.iter_mut().zip(&cur).zip(prev.iter_mut()) {
                *t = two * (*t - c * y) / h - *p;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut tmp);
            axpy(ck, &cur, out);
        }
        Ok(())
    }
}

/// Approximate `B^{-1}` (or `B^{-1/2}`) as a [`Solver`].
pub struct ChebSolver<T, O> {
    pub approx: ChebApprox<T>,
    pub op: O,
}

impl<T: Real, O: LinearOperator<T>> Solver<T> for ChebSolver<T, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn solve(&self, b: &[T], x: &mut [T]) -> Result<()> {
        self.approx.apply(&self.op, b, x)
    }
}
