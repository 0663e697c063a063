//! Polynomial filtered subspace iteration.

use std::time::Instant;

use super::{EigenResults, Problem, RitzPair, SolveStats, SolverConfig};
use crate::counters::{elapsed, OpCounters};
use crate::error::{Error, Result};
use crate::filter::{apply_pol, apply_pol_generalized, PolynomialFilter};
use crate::krylov::cgs2_orthogonalize;
use crate::matrix::{dense_sym_eig, DenseSym};
use crate::operators::LinearOperator;
use crate::scalar::{to_f64, Real};
use crate::vector::{axpy, dot, norm2, random_vector, rng_from_seed, scale};

/// Makes `y` orthonormal (or `B`-orthonormal) and orthogonal to `locked`;
/// returns the products `B y` (copies of `y` without `B`). Columns that
/// collapse are replaced by random vectors.
fn orthonormalize<T: Real>(
    y: &mut [Vec<T>],
    b: Option<&dyn LinearOperator<T>>,
    locked: &[(Vec<T>, Vec<T>)],
    rng: &mut rand_chacha::ChaCha8Rng,
    c: &mut OpCounters,
) -> Result<Vec<Vec<T>>> {
    let n = y.first().map_or(0, |v| v.len());
    let mut by: Vec<Vec<T>> = Vec::with_capacity(y.len());
    let b_apply = |x: &[T], c: &mut OpCounters| -> Result<Vec<T>> {
        match b {
            None => Ok(x.to_vec()),
            Some(b) => {
                let t = Instant::now();
                let mut out = vec![T::zero(); n];
                b.apply(x, &mut out)?;
                c.b_matvec += 1;
                c.t_mv += elapsed(t);
                Ok(out)
            }
        }
    };
    for j in 0..y.len() {
        let mut tries = 0;
        loop {
            let t = Instant::now();
            let coef: Vec<&[T]> = locked.iter().map(|p| p.1.as_slice()).chain(by.iter().map(|v| v.as_slice())).collect();
            let (done, rest) = y.split_at_mut(j);
            let upd: Vec<&[T]> = locked.iter().map(|p| p.0.as_slice()).chain(done.iter().map(|v| v.as_slice())).collect();
            let r = cgs2_orthogonalize(&mut rest[0], &coef, &upd, b.is_some());
            c.t_orth += elapsed(t);
            if r.norm > T::zero() {
                let bv = b_apply(&y[j], c)?;
                let nsq = dot(&y[j], &bv);
                if nsq > T::zero() {
                    let s = T::one() / nsq.sqrt();
                    scale(s, &mut y[j]);
                    let mut bv = bv;
                    scale(s, &mut bv);
                    by.push(bv);
                    break;
                }
            }
            tries += 1;
            if tries > 3 {
                return Err(Error::Solver("subspace iteration could not extend the block".into()));
            }
            y[j] = random_vector(n, rng);
        }
    }
    Ok(by)
}

fn combine_cols<T: Real>(basis: &[Vec<T>], s: &crate::matrix::DenseMat<T>, n: usize) -> Vec<Vec<T>> {
    (0..s.ncols())
        .map(|c| {
            let mut out = vec![T::zero(); n];
            for (j, v) in basis.iter().enumerate() {
                axpy(s.get(j, c), v, &mut out);
            }
            out
        })
        .collect()
}

/// Subspace iteration with the polynomial filter: the block is filtered and
/// re-orthonormalized every step, followed by Rayleigh-Ritz with `(A, B)`.
/// The block holds `ceil(1.3 est_count) + 8` vectors; `est_count` should not
/// undercount the slice (a DOS count is the usual source). A block that fills
/// up with wanted Ritz values is reported as [`Error::SubspaceTooSmall`].
pub fn cheb_si<T: Real>(
    prob: &Problem<'_, T>,
    filter: &PolynomialFilter,
    interval: (f64, f64),
    est_count: usize,
    cfg: &SolverConfig,
) -> Result<EigenResults<T>> {
    let t0 = Instant::now();
    cfg.validate()?;
    prob.check()?;
    if !(interval.0 < interval.1) {
        return Err(Error::InvalidArgument(format!("invalid interval [{}, {}]", interval.0, interval.1)));
    }
    if prob.b.is_some() && prob.b_solve.is_none() {
        return Err(Error::InvalidArgument("polynomial filtering of a pencil needs a solver for B".into()));
    }
    let n = prob.n();
    let mut c = OpCounters::default();
    let mut rng = rng_from_seed(cfg.seed);
    let mut locked: Vec<(Vec<T>, Vec<T>)> = Vec::new();
    if let Some(l) = prob.locked {
        for v in &l.vectors {
            let mut x = vec![v.clone()];
            let bx = orthonormalize(&mut x, prob.b, &locked, &mut rng, &mut c)?;
            locked.push((x.pop().unwrap(), bx.into_iter().next().unwrap()));
        }
    }
    let s = ((1.3 * est_count as f64).ceil() as usize + 8).min(n - locked.len());
    if s == 0 {
        let stats = SolveStats::from_counters(0, &c, t0.elapsed().as_secs_f64(), 0);
        return Ok(EigenResults::from_pairs(Vec::new(), stats, true));
    }
    let mut y: Vec<Vec<T>> = (0..s).map(|_| random_vector(n, &mut rng)).collect();
    orthonormalize(&mut y, prob.b, &locked, &mut rng, &mut c)?;
    let mut prev_inside: Option<usize> = None;
    let mut last: Vec<RitzPair<T>> = Vec::new();
    for it in 1..=cfg.max_its {
        let mut z = vec![vec![T::zero(); n]; s];
        for (yi, zi) in y.iter().zip(z.iter_mut()) {
            match prob.b_solve {
                None => apply_pol(filter, prob.a, yi, zi, &mut c)?,
                Some(bs) => apply_pol_generalized(filter, prob.a, bs, yi, zi, &mut c)?,
            }
        }
        y = z;
        let by = orthonormalize(&mut y, prob.b, &locked, &mut rng, &mut c)?;
        let mut ay = vec![vec![T::zero(); n]; s];
        let t = Instant::now();
        for (yi, ai) in y.iter().zip(ay.iter_mut()) {
            prob.a.apply(yi, ai)?;
            c.a_matvec += 1;
        }
        c.t_mv += elapsed(t);
        let h = DenseSym::from_fn(s, |i, j| (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i])) / (T::one() + T::one()));
        let (lam, sv) = dense_sym_eig(&h)?;
        let x = combine_cols(&y, &sv, n);
        let ax = combine_cols(&ay, &sv, n);
        let bx = combine_cols(&by, &sv, n);
        let mut inside: Vec<RitzPair<T>> = Vec::new();
        let mut all_conv = true;
        let mut all_above_bar = true;
        for i in 0..s {
            let mut r = ax[i].clone();
            axpy(-lam[i], &bx[i], &mut r);
            let res = norm2(&r);
            let (l, rr) = (to_f64(lam[i]), to_f64(res));
            if filter.eval_lambda(l) < filter.bar {
                all_above_bar = false;
            }
            if cfg.in_interval(l, interval) {
                all_conv &= cfg.converged(l, rr);
                let theta = crate::scalar::lit(filter.eval_lambda(l));
                inside.push(RitzPair { theta, lambda: lam[i], u: x[i].clone(), residual: res });
            }
        }
        let stable = prev_inside == Some(inside.len());
        prev_inside = Some(inside.len());
        // a block spanning the whole free space cannot miss anything
        if stable && s < n - locked.len() && (inside.len() >= s || all_above_bar) {
            return Err(Error::SubspaceTooSmall { converged: inside.len(), block: s });
        }
        if all_conv && stable {
            let stats = SolveStats::from_counters(it, &c, t0.elapsed().as_secs_f64(), 0);
            return Ok(EigenResults::from_pairs(inside, stats, true));
        }
        last = inside
            .into_iter()
            .filter(|p| cfg.converged(to_f64(p.lambda), to_f64(p.residual)))
            .collect();
        y = x;
    }
    let stats = SolveStats::from_counters(cfg.max_its, &c, t0.elapsed().as_secs_f64(), 0);
    Ok(EigenResults::from_pairs(last, stats, false))
}
