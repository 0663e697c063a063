//! Filtered Lanczos drivers: non-restarted with repeated deflated passes, and
//! thick-restarted with locking.

use std::time::Instant;

use super::filtered::{PolyFilterOp, PolyFilterOpB, RatFilterOp, RatFilterOpB};
use super::{rayleigh_with_bu, EigenResults, Problem, RitzPair, SolveStats, SolverConfig};
use crate::error::{Error, Result};
use crate::filter::{PolynomialFilter, RationalFilter};
use crate::krylov::lanczos::StepStatus;
use crate::krylov::{InnerProduct, KrylovOperator, Lanczos};
use crate::matrix::DenseMat;
use crate::operators::{ComplexSolver, LinearOperator};
use crate::matrix::{dense_sym_eig, DenseSym};
use crate::scalar::{lit, to_f64, Real};
use crate::vector::{axpy, dot, scale};

struct Candidate<T> {
    col: usize,
    theta: T,
    lambda: T,
    residual: T,
    pair: (Vec<T>, Vec<T>),
    inside: bool,
    converged: bool,
    /// The filtered operator sees this pair as converged although the pencil
    /// does not: it mixes eigenvectors with (nearly) equal filter values, and
    /// further steps of the same Krylov sequence cannot split it.
    stuck: bool,
}

/// Stuck pairs carried over to later passes or cycles.
struct Pooled<T> {
    theta: T,
    pair: (Vec<T>, Vec<T>),
}

impl<T: Real> Candidate<T> {
    fn into_ritz(self, ip: &InnerProduct<'_, T>) -> RitzPair<T> {
        let u = if ip.is_euclidean() || ip.x_from_w() { self.pair.0.clone() } else { self.pair.1.clone() };
        RitzPair { theta: self.theta, lambda: self.lambda, u, residual: self.residual }
    }
}

/// `(x, B x)` of a basis combination.
fn x_and_bx<'p, T>(ip: &InnerProduct<'_, T>, pair: &'p (Vec<T>, Vec<T>)) -> (&'p [T], &'p [T]) {
    match ip {
        InnerProduct::Euclidean => (&pair.0, &pair.0),
        InnerProduct::B { .. } => (&pair.0, &pair.1),
        InnerProduct::BInverse { .. } => (&pair.1, &pair.0),
    }
}

struct Ctx<'p, T> {
    a: &'p dyn LinearOperator<T>,
    bar: f64,
    interval: (f64, f64),
    cfg: &'p SolverConfig,
}

impl<T: Real> Ctx<'_, T> {
    fn sum_above_bar(&self, theta: &[T]) -> f64 {
        theta.iter().map(|&t| to_f64(t)).filter(|&t| t >= self.bar).sum()
    }

    /// Ritz pairs with `theta >= bar`, largest `theta` first, with their
    /// Rayleigh quotients and residuals for the original pencil.
    fn candidates(&self, eng: &mut Lanczos<'_, T>, ip: &InnerProduct<'_, T>, theta: &[T], y: &DenseMat<T>) -> Result<Vec<Candidate<T>>> {
        let mut cols: Vec<usize> = (0..theta.len()).filter(|&i| to_f64(theta[i]) >= self.bar).collect();
        cols.sort_by(|&i, &j| theta[j].partial_cmp(&theta[i]).unwrap_or(std::cmp::Ordering::Equal));
        let pairs = eng.combine_pairs(&y.select_columns(&cols));
        let mut out = Vec::with_capacity(cols.len());
        for (col, pair) in cols.into_iter().zip(pairs) {
            let (x, bx) = x_and_bx(ip, &pair);
            let (lambda, residual) = rayleigh_with_bu(self.a, x, bx, &mut eng.counters)?;
            let (l, r) = (to_f64(lambda), to_f64(residual));
            let converged = self.cfg.converged(l, r);
            let filt_res = eng.ritz_residual(y.col(col));
            let stuck = !converged && filt_res <= lit::<T>(100.0) * T::epsilon() * theta[col].abs().max(T::one());
            out.push(Candidate {
                col,
                theta: theta[col],
                lambda,
                residual,
                pair,
                inside: self.cfg.in_interval(l, self.interval),
                converged,
                stuck,
            });
        }
        Ok(out)
    }

    /// Whether a pooled pair's Rayleigh quotient lies in the interval.
    fn pooled_inside(&self, ip: &InnerProduct<'_, T>, p: &Pooled<T>) -> bool {
        let (x, bx) = x_and_bx(ip, &p.pair);
        let mut ax = vec![T::zero(); x.len()];
        if self.a.apply(x, &mut ax).is_err() {
            return true;
        }
        let l = to_f64(dot(x, &ax)) / to_f64(dot(x, bx));
        self.cfg.in_interval(l, self.interval)
    }

    /// Rayleigh-Ritz for the pencil on the span of the stuck candidates and
    /// the pooled pairs, after deflating that span against the locked set and
    /// the other candidates. Pairs sharing a filter value get split here once
    /// the span holds enough independent mixtures of them. Everything coming
    /// out of this step is marked stuck, so it never enters a restart set.
    fn separate(
        &self,
        eng: &mut Lanczos<'_, T>,
        ip: &InnerProduct<'_, T>,
        cands: Vec<Candidate<T>>,
        pool: &mut Vec<Pooled<T>>,
    ) -> Result<Vec<Candidate<T>>> {
        if pool.is_empty() && !cands.iter().any(|c| c.stuck) {
            return Ok(cands);
        }
        let euclid = ip.is_euclidean();
        let (stuck, mut out): (Vec<_>, Vec<_>) = cands.into_iter().partition(|c| c.stuck);
        let group: Vec<Pooled<T>> =
            stuck.into_iter().map(|c| Pooled { theta: c.theta, pair: c.pair }).chain(pool.drain(..)).collect();
        let fixed: Vec<(Vec<T>, Vec<T>)> = eng
            .locked_pairs()
            .map(|(w, z)| (w.to_vec(), z.to_vec()))
            .chain(out.iter().map(|c| c.pair.clone()))
            .collect();
        let dual = |p: &(Vec<T>, Vec<T>)| -> Vec<T> { if euclid { p.0.clone() } else { p.1.clone() } };
        let mut basis: Vec<Pooled<T>> = Vec::new();
        for mut g in group {
            let before = dot(&g.pair.0, &dual(&g.pair)).abs().sqrt();
            for _ in 0..2 {
                for p in fixed.iter().chain(basis.iter().map(|b| &b.pair)) {
                    let h = dot(&g.pair.0, &dual(p));
                    axpy(-h, &p.0, &mut g.pair.0);
                    if !euclid {
                        axpy(-h, &p.1, &mut g.pair.1);
                    }
                }
            }
            let nsq = dot(&g.pair.0, &dual(&g.pair));
            if !(nsq > T::zero()) || nsq.sqrt() <= lit::<T>(1e-8) * before {
                continue;
            }
            let s = T::one() / nsq.sqrt();
            scale(s, &mut g.pair.0);
            if !euclid {
                scale(s, &mut g.pair.1);
            }
            basis.push(g);
        }
        if basis.is_empty() {
            return Ok(out);
        }
        let k = basis.len();
        let n = basis[0].pair.0.len();
        let mut ax = vec![vec![T::zero(); n]; k];
        for (b, o) in basis.iter().zip(ax.iter_mut()) {
            let (x, _) = x_and_bx(ip, &b.pair);
            self.a.apply(x, o)?;
            eng.counters.a_matvec += 1;
        }
        let h = DenseSym::from_fn(k, |i, j| {
            let (xi, _) = x_and_bx(ip, &basis[i].pair);
            let (xj, _) = x_and_bx(ip, &basis[j].pair);
            (dot(xi, &ax[j]) + dot(xj, &ax[i])) * lit::<T>(0.5)
        });
        let (_, s) = dense_sym_eig(&h)?;
        for c in 0..k {
            let mut w = vec![T::zero(); n];
            let mut z = if euclid { Vec::new() } else { vec![T::zero(); n] };
            let mut theta = T::zero();
            for (i, b) in basis.iter().enumerate() {
                let sic = s.get(i, c);
                axpy(sic, &b.pair.0, &mut w);
                if !euclid {
                    axpy(sic, &b.pair.1, &mut z);
                }
                theta += sic * sic * b.theta;
            }
            let pair = (w, z);
            let (x, bx) = x_and_bx(ip, &pair);
            let (lambda, residual) = rayleigh_with_bu(self.a, x, bx, &mut eng.counters)?;
            let (l, r) = (to_f64(lambda), to_f64(residual));
            out.push(Candidate {
                col: usize::MAX,
                theta,
                lambda,
                residual,
                pair,
                inside: self.cfg.in_interval(l, self.interval),
                converged: self.cfg.converged(l, r),
                stuck: true,
            });
        }
        Ok(out)
    }
}

fn preload<T: Real>(eng: &mut Lanczos<'_, T>, prob: &Problem<'_, T>) -> Result<()> {
    if let Some(l) = prob.locked {
        for v in &l.vectors {
            eng.lock_x(v.clone())?;
        }
    }
    Ok(())
}

fn check_interval((lo, hi): (f64, f64)) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
    }
    Ok(())
}

/// Most stuck pairs kept between passes or cycles.
fn pool_cap(cfg: &SolverConfig) -> usize {
    (cfg.m / 2).max(8)
}

/// Locks the converged candidates inside the interval and moves the stuck
/// unconverged ones into the pool. Returns the number locked.
fn settle<T: Real>(
    eng: &mut Lanczos<'_, T>,
    ip: &InnerProduct<'_, T>,
    cands: &mut Vec<Candidate<T>>,
    pool: &mut Vec<Pooled<T>>,
    found: &mut Vec<RitzPair<T>>,
    cap: usize,
) -> usize {
    let mut locked = 0;
    let mut rest = Vec::new();
    for c in cands.drain(..) {
        if c.inside && c.converged {
            eng.lock_pair(c.pair.clone());
            found.push(c.into_ritz(ip));
            locked += 1;
        } else if c.stuck {
            if pool.len() < cap {
                pool.push(Pooled { theta: c.theta, pair: c.pair });
            }
        } else {
            rest.push(c);
        }
    }
    *cands = rest;
    locked
}

/// Non-restarted Lanczos. Each pass starts from a fresh random vector,
/// deflated against everything locked so far, and runs until the sum of the
/// wanted Ritz values stagnates and every wanted candidate inside the interval
/// has converged; a pass that locks nothing new ends the run. Repeated passes
/// pick up further copies of multiple eigenvalues, which a single Krylov
/// sequence cannot see, and supply the extra mixtures that split stuck pairs.
fn run_nr<T: Real>(op: &dyn KrylovOperator<T>, ip: &InnerProduct<'_, T>, prob: &Problem<'_, T>, ctx: &Ctx<'_, T>) -> Result<EigenResults<T>> {
    let t0 = Instant::now();
    let cfg = ctx.cfg;
    let n = op.dim();
    let mut eng = Lanczos::new(op, ip, cfg.seed);
    preload(&mut eng, prob)?;
    let mut found: Vec<RitzPair<T>> = Vec::new();
    let mut pool: Vec<Pooled<T>> = Vec::new();
    let (mut niter, mut passes, mut complete) = (0usize, 0usize, true);
    let mut idle = 0;
    'passes: loop {
        if eng.nlocked() >= n || niter >= cfg.max_its || !eng.start_random()? {
            break;
        }
        passes += 1;
        let mut told: Option<f64> = None;
        let mut new_found = 0;
        let pool_before = pool.len();
        loop {
            let st = eng.step()?;
            niter += 1;
            let k = eng.steps();
            let exhausted = st == StepStatus::Exhausted || eng.nlocked() + k >= n;
            let capped = niter >= cfg.max_its;
            if k % cfg.ncycle != 0 && !exhausted && !capped {
                continue;
            }
            let (theta, _) = eng.ritz(false)?;
            let tnew = ctx.sum_above_bar(&theta);
            let stagnated = told.is_some_and(|t| (tnew - t).abs() < cfg.tau1(tnew));
            told = Some(tnew);
            if !stagnated && !exhausted && !capped {
                continue;
            }
            let (theta, y) = eng.ritz(true)?;
            let cands = ctx.candidates(&mut eng, ip, &theta, &y.expect("vectors requested"))?;
            let pending = cands.iter().any(|c| c.inside && !c.converged && !c.stuck);
            if pending && !exhausted && !capped {
                continue;
            }
            let mut cands = ctx.separate(&mut eng, ip, cands, &mut pool)?;
            new_found += settle(&mut eng, ip, &mut cands, &mut pool, &mut found, pool_cap(cfg));
            if capped {
                complete = !pending;
                break 'passes;
            }
            break;
        }
        if new_found > 0 {
            idle = 0;
        } else {
            // a pass that only grew the pool may still split it in the next one
            idle += 1;
            if pool.len() <= pool_before || idle > 2 {
                break;
            }
        }
    }
    complete &= !pool.iter().any(|p| ctx.pooled_inside(ip, p));
    let stats = SolveStats::from_counters(niter, &eng.counters, t0.elapsed().as_secs_f64(), passes);
    Ok(EigenResults::from_pairs(found, stats, complete))
}

/// Thick-restart Lanczos with locking. Each cycle extends the basis to the
/// restart dimension (or until the wanted Ritz sum stagnates), locks the
/// converged candidates and restarts with the unconverged ones. When no
/// unconverged candidate is left the next cycle starts from a fresh random
/// vector deflated against the locked set; two consecutive cycles without
/// candidates end the run.
fn run_tr<T: Real>(op: &dyn KrylovOperator<T>, ip: &InnerProduct<'_, T>, prob: &Problem<'_, T>, ctx: &Ctx<'_, T>) -> Result<EigenResults<T>> {
    let t0 = Instant::now();
    let cfg = ctx.cfg;
    let n = op.dim();
    let mut eng = Lanczos::new(op, ip, cfg.seed);
    preload(&mut eng, prob)?;
    let mut found: Vec<RitzPair<T>> = Vec::new();
    let mut pool: Vec<Pooled<T>> = Vec::new();
    let (mut niter, mut cycles, mut complete) = (0usize, 0usize, true);
    let tr_cap = (cfg.m / 2).max(1);
    let mut started = eng.nlocked() < n && eng.start_random()?;
    let mut empty_cycles = 0;
    while started {
        cycles += 1;
        let m_eff = cfg.m.min(n - eng.nlocked());
        let first = eng.steps();
        let mut told: Option<f64> = None;
        let (mut exhausted, mut capped) = (false, false);
        loop {
            let st = eng.step()?;
            niter += 1;
            if st == StepStatus::Exhausted || eng.nlocked() + eng.steps() >= n {
                exhausted = true;
                break;
            }
            if niter >= cfg.max_its {
                capped = true;
                break;
            }
            if eng.steps() >= m_eff {
                break;
            }
            if (eng.steps() - first) % cfg.ncycle == 0 {
                let (theta, _) = eng.ritz(false)?;
                let tnew = ctx.sum_above_bar(&theta);
                if told.is_some_and(|t| (tnew - t).abs() < cfg.tau1(tnew)) {
                    break;
                }
                told = Some(tnew);
            }
        }
        let (theta, y) = eng.ritz(true)?;
        let y = y.expect("vectors requested");
        let cands = ctx.candidates(&mut eng, ip, &theta, &y)?;
        let any_current = cands.iter().any(|c| c.inside);
        let mut cands = ctx.separate(&mut eng, ip, cands, &mut pool)?;
        let locked = settle(&mut eng, ip, &mut cands, &mut pool, &mut found, pool_cap(cfg));
        let mut keep: Vec<usize> = Vec::new();
        let mut deferred = false;
        for c in cands.iter().filter(|c| c.inside) {
            if keep.len() < tr_cap {
                keep.push(c.col);
            } else {
                deferred = true;
            }
        }
        if capped {
            complete = keep.is_empty() && !deferred;
            break;
        }
        if exhausted {
            break;
        }
        if any_current || locked > 0 {
            empty_cycles = 0;
        } else {
            empty_cycles += 1;
            if empty_cycles >= 2 {
                break;
            }
        }
        started = if keep.is_empty() || eng.nlocked() + keep.len() >= n {
            eng.nlocked() < n && eng.start_random()?
        } else {
            let th: Vec<T> = keep.iter().map(|&c| theta[c]).collect();
            eng.thick_restart(&y.select_columns(&keep), &th)? || eng.start_random()?
        };
    }
    complete &= !pool.iter().any(|p| ctx.pooled_inside(ip, p));
    let stats = SolveStats::from_counters(niter, &eng.counters, t0.elapsed().as_secs_f64(), cycles);
    Ok(EigenResults::from_pairs(found, stats, complete))
}

enum FilterRef<'f, T> {
    Poly(&'f PolynomialFilter),
    Rat(&'f RationalFilter, &'f [&'f dyn ComplexSolver<T>]),
}

fn drive<T: Real>(prob: &Problem<'_, T>, filter: FilterRef<'_, T>, interval: (f64, f64), cfg: &SolverConfig, restart: bool) -> Result<EigenResults<T>> {
    cfg.validate()?;
    check_interval(interval)?;
    prob.check()?;
    let (op, ip, bar): (Box<dyn KrylovOperator<T> + '_>, InnerProduct<'_, T>, f64) = match filter {
        FilterRef::Poly(f) => match (prob.b, prob.b_solve) {
            (None, _) => (Box::new(PolyFilterOp { filter: f, a: prob.a }), InnerProduct::Euclidean, f.bar),
            (Some(b), Some(b_solve)) => (
                Box::new(PolyFilterOpB { filter: f, a: prob.a, b_solve }),
                InnerProduct::B { b, b_solve },
                f.bar,
            ),
            (Some(_), None) => {
                return Err(Error::InvalidArgument("polynomial filtering of a pencil needs a solver for B".into()))
            }
        },
        FilterRef::Rat(f, solvers) => {
            if solvers.len() != f.poles.len() {
                return Err(Error::InvalidArgument(format!("{} pole solvers for {} poles", solvers.len(), f.poles.len())));
            }
            for s in solvers {
                if s.dim() != prob.n() {
                    return Err(Error::DimensionMismatch { expected: prob.n(), got: s.dim() });
                }
            }
            match prob.b {
                None => (Box::new(RatFilterOp { filter: f, solvers }), InnerProduct::Euclidean, f.bar),
                Some(b) => (Box::new(RatFilterOpB { filter: f, solvers, b }), InnerProduct::BInverse { b }, f.bar),
            }
        }
    };
    let ctx = Ctx { a: prob.a, bar, interval, cfg };
    if restart {
        run_tr(op.as_ref(), &ip, prob, &ctx)
    } else {
        run_nr(op.as_ref(), &ip, prob, &ctx)
    }
}

/// Polynomial filtered non-restarted Lanczos for the eigenpairs in `interval`.
pub fn cheb_lan_nr<T: Real>(
    prob: &Problem<'_, T>,
    filter: &PolynomialFilter,
    interval: (f64, f64),
    cfg: &SolverConfig,
) -> Result<EigenResults<T>> {
    drive(prob, FilterRef::Poly(filter), interval, cfg, false)
}

/// Polynomial filtered thick-restart Lanczos with locking.
pub fn cheb_lan_tr<T: Real>(
    prob: &Problem<'_, T>,
    filter: &PolynomialFilter,
    interval: (f64, f64),
    cfg: &SolverConfig,
) -> Result<EigenResults<T>> {
    drive(prob, FilterRef::Poly(filter), interval, cfg, true)
}

/// Rational filtered non-restarted Lanczos; `solvers[j]` solves with
/// `A - shift_j B` (see [`RationalFilter::shifts`]).
pub fn rat_lan_nr<T: Real>(
    prob: &Problem<'_, T>,
    filter: &RationalFilter,
    solvers: &[&dyn ComplexSolver<T>],
    interval: (f64, f64),
    cfg: &SolverConfig,
) -> Result<EigenResults<T>> {
    drive(prob, FilterRef::Rat(filter, solvers), interval, cfg, false)
}

/// Rational filtered thick-restart Lanczos with locking.
pub fn rat_lan_tr<T: Real>(
    prob: &Problem<'_, T>,
    filter: &RationalFilter,
    solvers: &[&dyn ComplexSolver<T>],
    interval: (f64, f64),
    cfg: &SolverConfig,
) -> Result<EigenResults<T>> {
    drive(prob, FilterRef::Rat(filter, solvers), interval, cfg, true)
}
