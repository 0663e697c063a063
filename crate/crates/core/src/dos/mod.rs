//! Spectral density estimation by the kernel polynomial method and by
//! Lanczos quadrature.

use crate::error::{Error, Result};
use crate::krylov::{lanczos_run, InnerProduct, PlainOperator, SpectralBounds};
use crate::matrix::sym_tridiag_eig;
use crate::operators::{LinearOperator, Solver};
use crate::scalar::{lit, to_f64, Real};
use crate::vector::{dot, norm2, rademacher, random_vector, rng_from_seed, scale};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DosMethod {
    Kpm,
    Lanczos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DosConfig {
    pub method: DosMethod,
    /// KPM degree or number of Lanczos steps.
    pub m: usize,
    pub n_vec: usize,
    pub npts: usize,
    /// Gaussian width for the Lanczos method; `None` picks `0.4 (b-a) / sqrt(m)`.
    pub sigma: Option<f64>,
    pub seed: u64,
}

impl Default for DosConfig {
    fn default() -> Self {
        Self { method: DosMethod::Kpm, m: 60, n_vec: 40, npts: 300, sigma: None, seed: 0 }
    }
}

impl DosConfig {
    fn validate(&self) -> Result<()> {
        if self.m < 1 || self.n_vec < 1 || self.npts < 2 {
            return Err(Error::InvalidArgument(format!(
                "DOS needs m >= 1, n_vec >= 1, npts >= 2 (got {}, {}, {})",
                self.m, self.n_vec, self.npts
            )));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0) {
                return Err(Error::InvalidArgument(format!("Gaussian width must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// Sampled density `phi` on an even grid. `phi` integrates to one, so the
/// eigenvalue count over an interval is `n` times its integral there.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DosCurve {
    pub xdos: Vec<f64>,
    pub ydos: Vec<f64>,
    /// Problem dimension.
    pub n: usize,
    /// Estimated count over the whole grid range.
    pub nev_est: f64,
}

impl DosCurve {
    fn from_samples(xdos: Vec<f64>, mut ydos: Vec<f64>, n: usize) -> Result<Self> {
        for y in ydos.iter_mut() {
            if !y.is_finite() {
                return Err(Error::Solver("non-finite DOS value".into()));
            }
            if *y < 0.0 {
                *y = 0.0;
            }
        }
        let total = trapezoid(&xdos, &ydos);
        if !(total > 0.0) {
            return Err(Error::Solver("DOS curve has no mass inside the bounds".into()));
        }
        ydos.iter_mut().for_each(|y| *y /= total);
        let mut c = Self { xdos, ydos, n, nev_est: 0.0 };
        c.nev_est = n as f64 * trapezoid(&c.xdos, &c.ydos);
        Ok(c)
    }

    pub fn lo(&self) -> f64 {
        self.xdos[0]
    }

    pub fn hi(&self) -> f64 {
        *self.xdos.last().unwrap()
    }

    /// Linear interpolation of the sampled curve.
    pub fn eval(&self, t: f64) -> f64 {
        let x = &self.xdos;
        if t <= x[0] {
            return if t == x[0] { self.ydos[0] } else { 0.0 };
        }
        if t >= x[x.len() - 1] {
            return if t == x[x.len() - 1] { self.ydos[x.len() - 1] } else { 0.0 };
        }
        let j = x.partition_point(|&v| v <= t) - 1;
        let w = (t - x[j]) / (x[j + 1] - x[j]);
        self.ydos[j] * (1.0 - w) + self.ydos[j + 1] * w
    }

    /// Grid points in `[lo, hi]`, with the interval ends added.
    pub(crate) fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![lo];
        for &x in &self.xdos {
            if x > lo && x < hi {
                xs.push(x);
            }
        }
        if hi > lo {
            xs.push(hi);
        }
        let ys = xs.iter().map(|&t| self.eval(t)).collect();
        (xs, ys)
    }

    /// `[lo, hi]` clipped to the curve range; `None` when they do not overlap.
    pub(crate) fn clip(&self, lo: f64, hi: f64) -> Result<Option<(f64, f64)>> {
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
        }
        let (a, b) = (lo.max(self.lo()), hi.min(self.hi()));
        Ok((a < b).then_some((a, b)))
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Estimated number of eigenvalues in `[lo, hi]`.
pub fn dos_count(curve: &DosCurve, lo: f64, hi: f64) -> Result<f64> {
    let Some((lo, hi)) = curve.clip(lo, hi)? else {
        return Ok(0.0);
    };
    let (xs, ys) = curve.window(lo, hi);
    Ok(curve.n as f64 * trapezoid(&xs, &ys))
}

fn grid(bounds: &SpectralBounds, npts: usize) -> Vec<f64> {
    let h = (bounds.lmax - bounds.lmin) / (npts - 1) as f64;
    (0..npts).map(|i| if i + 1 == npts { bounds.lmax } else { bounds.lmin + h * i as f64 }).collect()
}

fn check_bounds(bounds: &SpectralBounds) -> Result<()> {
    if !(bounds.lmin < bounds.lmax) {
        return Err(Error::InvalidArgument(format!("bounds need lmin < lmax, got [{}, {}]", bounds.lmin, bounds.lmax)));
    }
    Ok(())
}

/// Jackson damping factors `g_0..g_m`.
pub fn jackson_coeffs(m: usize) -> Vec<f64> {
    let a = std::f64::consts::PI / (m + 2) as f64;
    (0..=m)
        .map(|k| {
            let k = k as f64;
            ((1.0 - k / (m as f64 + 2.0)) * (a * k).cos() * a.sin() + (1.0 / (m as f64 + 2.0)) * (a * k).sin() * a.cos())
                / a.sin()
        })
        .collect()
}

/// `B` together with its solver and the half solve `G^{-T}` (`B = G G^T`) used
/// to draw correctly distributed start vectors for the pencil `(A, B)`.
pub struct BPencil<'a, T> {
    pub b: &'a dyn LinearOperator<T>,
    pub b_solve: &'a dyn Solver<T>,
    pub half_solve: &'a dyn Solver<T>,
}

fn probe_seed(seed: u64, l: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(l as u64)
}

fn kpm_impl<T: Real>(
    a: &dyn LinearOperator<T>,
    pencil: Option<&BPencil<'_, T>>,
    bounds: &SpectralBounds,
    cfg: &DosConfig,
) -> Result<DosCurve> {
    cfg.validate()?;
    check_bounds(bounds)?;
    let n = a.dim();
    let m = cfg.m;
    let c: T = lit((bounds.lmax + bounds.lmin) / 2.0);
    let d: T = lit((bounds.lmax - bounds.lmin) / 2.0);
    let two: T = lit(2.0);
    let mut mu = vec![0.0f64; m + 1];
    let mut tmp = vec![T::zero(); n];
    // y = (A - c B) x / d, then B^{-1} for the pencil
    let apply_hat = |x: &[T], y: &mut [T], tmp: &mut [T]| -> Result<()> {
        match pencil {
            None => {
                a.apply(x, y)?;
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi = (*yi - c * *xi) / d;
                }
            }
            Some(p) => {
                a.apply(x, tmp)?;
                p.b_solve.solve(tmp, y)?;
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi = (*yi - c * *xi) / d;
                }
            }
        }
        Ok(())
    };
    for l in 0..cfg.n_vec {
        let mut rng = rng_from_seed(probe_seed(cfg.seed, l));
        let v: Vec<T> = rademacher(n, &mut rng);
        // moments are left^T T_k(op) v0
        let (left, v0) = match pencil {
            None => (v.clone(), v),
            Some(p) => {
                let mut w = vec![T::zero(); n];
                p.half_solve.solve(&v, &mut w)?;
                let mut bw = vec![T::zero(); n];
                p.b.apply(&w, &mut bw)?;
                (bw, w)
            }
        };
        let mut prev = v0.clone();
        let mut cur = vec![T::zero(); n];
        mu[0] += to_f64(dot(&left, &prev));
        if m >= 1 {
            apply_hat(&prev, &mut cur, &mut tmp)?;
            mu[1] += to_f64(dot(&left, &cur));
        }
        let mut next = vec![T::zero(); n];
        for k in 2..=m {
            apply_hat(&cur, &mut next, &mut tmp)?;
            for (nx, pv) in next.iter_mut().zip(&prev) {
                *nx = two * *nx - *pv;
            }
            mu[k] += to_f64(dot(&left, &next));
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let scale_mu = 1.0 / (n as f64 * cfg.n_vec as f64);
    let g = jackson_coeffs(m);
    let coef: Vec<f64> = mu.iter().zip(&g).enumerate().map(|(k, (u, g))| u * scale_mu * g * if k == 0 { 1.0 } else { 2.0 }).collect();
    let xs = grid(bounds, cfg.npts);
    let (cf, df) = ((bounds.lmax + bounds.lmin) / 2.0, (bounds.lmax - bounds.lmin) / 2.0);
    // the 1/sqrt(1-t^2) weight is singular at the ends; evaluate there a
    // quarter grid step inside
    let edge = 1.0 - 0.5 / (cfg.npts - 1) as f64;
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let t = ((x - cf) / df).clamp(-edge, edge);
            let th = t.acos();
            let s: f64 = coef.iter().enumerate().map(|(k, ck)| ck * (k as f64 * th).cos()).sum();
            s / (std::f64::consts::PI * (1.0 - t * t).sqrt())
        })
        .collect();
    DosCurve::from_samples(xs, ys, n)
}

/// Kernel polynomial method with Jackson damping and Rademacher probes.
pub fn kpm_dos<T: Real>(a: &dyn LinearOperator<T>, bounds: &SpectralBounds, cfg: &DosConfig) -> Result<DosCurve> {
    kpm_impl(a, None, bounds, cfg)
}

fn lan_impl<T: Real>(
    a: &dyn LinearOperator<T>,
    pencil: Option<&BPencil<'_, T>>,
    bounds: &SpectralBounds,
    cfg: &DosConfig,
) -> Result<DosCurve> {
    cfg.validate()?;
    check_bounds(bounds)?;
    let n = a.dim();
    let op = PlainOperator(a);
    let ip = match pencil {
        None => InnerProduct::Euclidean,
        Some(p) => InnerProduct::B { b: p.b, b_solve: p.b_solve },
    };
    let sigma = cfg.sigma.unwrap_or(0.4 * (bounds.lmax - bounds.lmin) / (cfg.m as f64).sqrt());
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for l in 0..cfg.n_vec {
        let mut rng = rng_from_seed(probe_seed(cfg.seed, l));
        let mut v: Vec<T> = random_vector(n, &mut rng);
        let nv = norm2(&v);
        scale(T::one() / nv, &mut v);
        let start = match pencil {
            None => v,
            Some(p) => {
                let mut w = vec![T::zero(); n];
                p.half_solve.solve(&v, &mut w)?;
                w
            }
        };
        let st = lanczos_run(&op, &ip, &start, cfg.m.min(n))?;
        let (theta, y) = sym_tridiag_eig(&st.t, true)?;
        let y = y.expect("vectors requested");
        for (i, th) in theta.iter().enumerate() {
            let tau = to_f64(y.get(0, i));
            nodes.push((to_f64(*th), tau * tau));
        }
    }
    let xs = grid(bounds, cfg.npts);
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma * cfg.n_vec as f64);
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            nodes
                .iter()
                .map(|&(th, w)| {
                    let u = (x - th) / sigma;
                    w * (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    DosCurve::from_samples(xs, ys, n)
}

/// Lanczos quadrature: Gaussians at the Ritz values weighted by the squared
/// first components of the tridiagonal eigenvectors, averaged over random
/// starts.
pub fn lan_dos<T: Real>(a: &dyn LinearOperator<T>, bounds: &SpectralBounds, cfg: &DosConfig) -> Result<DosCurve> {
    lan_impl(a, None, bounds, cfg)
}

/// Density of the pencil `(A, B)` with the method chosen in `cfg`.
pub fn dos_generalized<T: Real>(
    a: &dyn LinearOperator<T>,
    pencil: &BPencil<'_, T>,
    bounds: &SpectralBounds,
    cfg: &DosConfig,
) -> Result<DosCurve> {
    match cfg.method {
        DosMethod::Kpm => kpm_impl(a, Some(pencil), bounds, cfg),
        DosMethod::Lanczos => lan_impl(a, Some(pencil), bounds, cfg),
    }
}

/// Density of `A` with the method chosen in `cfg`.
pub fn dos<T: Real>(a: &dyn LinearOperator<T>, bounds: &SpectralBounds, cfg: &DosConfig) -> Result<DosCurve> {
    match cfg.method {
        DosMethod::Kpm => kpm_dos(a, bounds, cfg),
        DosMethod::Lanczos => lan_dos(a, bounds, cfg),
    }
}
