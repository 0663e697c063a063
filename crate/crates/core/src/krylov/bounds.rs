//! Extreme eigenvalue estimates for spectral mapping.

use super::lanczos::{Lanczos, StepStatus};
use super::{InnerProduct, KrylovOperator};
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Interval `[lmin, lmax]` estimated to contain the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SpectralBounds {
    pub lmin: f64,
    pub lmax: f64,
}

impl SpectralBounds {
    pub fn new(lmin: f64, lmax: f64) -> Result<Self> {
        if !(lmin < lmax) || !lmin.is_finite() || !lmax.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid bounds [{lmin}, {lmax}]")));
        }
        Ok(Self { lmin, lmax })
    }

    /// Widens a degenerate interval so that `lmin < lmax`.
    fn ensure_width(lmin: f64, lmax: f64) -> Self {
        if lmin < lmax {
            return Self { lmin, lmax };
        }
        let pad = 1e-8 * lmin.abs().max(1.0);
        Self { lmin: lmin - pad, lmax: lmax + pad }
    }
}

/// Smallest and largest Ritz values of a `maxit`-step Lanczos run.
pub fn lan_bounds<T: Real>(
    op: &dyn KrylovOperator<T>,
    ip: &InnerProduct<'_, T>,
    maxit: usize,
    seed: u64,
) -> Result<SpectralBounds> {
    let mut lz = Lanczos::new(op, ip, seed);
    lz.set_restart_on_breakdown(false);
    if !lz.start_random()? {
        return Err(Error::Solver("could not draw a start vector".into()));
    }
    let steps = maxit.max(1).min(op.dim());
    while lz.steps() < steps {
        if lz.step()? == StepStatus::Exhausted {
            break;
        }
    }
    let (theta, _) = lz.ritz(false)?;
    Ok(SpectralBounds::ensure_width(to_f64(theta[0]), to_f64(*theta.last().unwrap())))
}

/// Thick-restart Lanczos on both ends of the spectrum. Restarts (keeping a few
/// extreme Ritz vectors) until the extreme Ritz values move by less than
/// `tol` relative, then pads each end by its Ritz residual bound.
pub fn lan_tr_bounds<T: Real>(
    op: &dyn KrylovOperator<T>,
    ip: &InnerProduct<'_, T>,
    tol: f64,
    restart_dim: usize,
    seed: u64,
) -> Result<SpectralBounds> {
    const MAX_CYCLES: usize = 100;
    const KEEP_EACH_END: usize = 3;
    let n = op.dim();
    let m = restart_dim.max(2 * KEEP_EACH_END + 2).min(n);
    let mut lz = Lanczos::new(op, ip, seed);
    lz.set_restart_on_breakdown(false);
    if !lz.start_random()? {
        return Err(Error::Solver("could not draw a start vector".into()));
    }
    let mut prev: Option<(f64, f64)> = None;
    for _ in 0..MAX_CYCLES {
        let mut exhausted = false;
        while lz.steps() < m {
            if lz.step()? == StepStatus::Exhausted {
                exhausted = true;
                break;
            }
        }
        let (theta, y) = lz.ritz(true)?;
        let y = y.expect("vectors requested");
        let k = theta.len();
        let lo = to_f64(theta[0]);
        let hi = to_f64(theta[k - 1]);
        // rounding floor so that exact Ritz values still enclose the spectrum
        let floor = 1e-12 * lo.abs().max(hi.abs());
        let r_lo = to_f64(lz.ritz_residual(y.col(0))).max(floor);
        let r_hi = to_f64(lz.ritz_residual(y.col(k - 1))).max(floor);
        let settled = match prev {
            Some((plo, phi)) => {
                (lo - plo).abs() <= tol * lo.abs().max(1.0) && (hi - phi).abs() <= tol * hi.abs().max(1.0)
            }
            None => false,
        };
        if exhausted || settled || lz.beta_next().is_none() {
            return Ok(SpectralBounds::ensure_width(lo - r_lo, hi + r_hi));
        }
        prev = Some((lo, hi));
        let keep: Vec<usize> = if k > 2 * KEEP_EACH_END {
            (0..KEEP_EACH_END).chain(k - KEEP_EACH_END..k).collect()
        } else {
            (0..k).collect()
        };
        let yk = y.select_columns(&keep);
        let tk: Vec<T> = keep.iter().map(|&i| theta[i]).collect();
        if !lz.thick_restart(&yk, &tk)? {
            return Ok(SpectralBounds::ensure_width(lo - r_lo, hi + r_hi));
        }
    }
    Err(Error::NoConvergence { iterations: MAX_CYCLES })
}
