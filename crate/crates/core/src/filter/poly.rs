//! Balanced, damped Chebyshev polynomial filters.

use std::time::Instant;

use crate::counters::{elapsed, OpCounters};
use crate::dos::jackson_coeffs;
use crate::error::{Error, Result};
use crate::krylov::SpectralBounds;
use crate::operators::{LinearOperator, Solver};
use crate::scalar::{lit, Real};

/// Linear map `t = (lambda - c) / d` taking the spectrum onto `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SpectralMap {
    pub c: f64,
    pub d: f64,
}

impl SpectralMap {
    pub fn new(bounds: &SpectralBounds) -> Result<Self> {
        let d = (bounds.lmax - bounds.lmin) / 2.0;
        if !(d > 0.0) {
            return Err(Error::InvalidArgument(format!("degenerate bounds [{}, {}]", bounds.lmin, bounds.lmax)));
        }
        Ok(Self { c: (bounds.lmax + bounds.lmin) / 2.0, d })
    }

    pub fn to_unit(&self, lambda: f64) -> f64 {
        (lambda - self.c) / self.d
    }

    pub fn from_unit(&self, t: f64) -> f64 {
        self.c + self.d * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Damping {
    None,
    /// Lanczos sigma factors.
    Sigma,
    Jackson,
}

/// Which end of the spectrum a boundary slice touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Left,
    Right,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyOptions {
    pub tau: f64,
    pub max_deg: usize,
    pub damping: Damping,
}

impl Default for PolyOptions {
    fn default() -> Self {
        Self { tau: 0.8, max_deg: 3000, damping: Damping::Sigma }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PolynomialFilter {
    pub degree: usize,
    pub gamma: f64,
    /// Damped expansion coefficients, before normalization.
    pub coeffs: Vec<f64>,
    /// `sum_j coeffs[j] T_j(gamma)`; the filter is the expansion divided by this.
    pub norm: f64,
    pub map: SpectralMap,
    pub tau: f64,
    /// Target interval mapped to `[-1, 1]` and clipped to it.
    pub t_lo: f64,
    pub t_hi: f64,
    /// Ritz values of the filtered operator at or above this are candidates.
    pub bar: f64,
    pub damping: Damping,
    /// The degree cap was hit before the endpoint values dropped below `tau`.
    pub cap_reached: bool,
    pub boundary: Option<BoundarySide>,
}

/// `mu_0 = 1/2`, `mu_j = cos(j acos(gamma))`.
pub fn chebyshev_coeffs(gamma: f64, k: usize) -> Result<Vec<f64>> {
    if !(gamma.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("filter center must lie in (-1, 1), got {gamma}")));
    }
    let th = gamma.acos();
    Ok((0..=k).map(|j| if j == 0 { 0.5 } else { (j as f64 * th).cos() }).collect())
}

pub fn damping_multipliers(k: usize, kind: Damping) -> Vec<f64> {
    match kind {
        Damping::None => vec![1.0; k + 1],
        Damping::Sigma => {
            let th = std::f64::consts::PI / (k + 1) as f64;
            (0..=k)
                .map(|j| {
                    if j == 0 {
                        1.0
                    } else {
                        let x = j as f64 * th;
                        x.sin() / x
                    }
                })
                .collect()
        }
        Damping::Jackson => jackson_coeffs(k),
    }
}

/// `sum_j c_j T_j(t)` by the three-term recurrence.
fn cheb_sum(c: &[f64], t: f64) -> f64 {
    let mut s = c[0];
    if c.len() == 1 {
        return s;
    }
    let (mut t0, mut t1) = (1.0, t);
    s += c[1] * t1;
    for cj in &c[2..] {
        let t2 = 2.0 * t * t1 - t0;
        s += cj * t2;
        t0 = t1;
        t1 = t2;
    }
    s
}

fn cheb_values(k: usize, t: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(k + 1);
    v.push(1.0);
    if k >= 1 {
        v.push(t);
    }
    for j in 2..=k {
        v.push(2.0 * t * v[j - 1] - v[j - 2]);
    }
    v
}

impl PolynomialFilter {
    /// Builds the filter of degree `k` centered at `gamma`.
    pub fn with_center(gamma: f64, k: usize, damping: Damping, map: SpectralMap) -> Result<Self> {
        let mu = chebyshev_coeffs(gamma, k)?;
        let g = damping_multipliers(k, damping);
        let coeffs: Vec<f64> = mu.iter().zip(&g).map(|(m, g)| m * g).collect();
        let norm = cheb_sum(&coeffs, gamma);
        Ok(Self {
            degree: k,
            gamma,
            coeffs,
            norm,
            map,
            tau: 1.0,
            t_lo: -1.0,
            t_hi: 1.0,
            bar: f64::NEG_INFINITY,
            damping,
            cap_reached: false,
            boundary: None,
        })
    }

    /// Filter value at a mapped point `t` in `[-1, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.abs() <= 1.0) {
            return Err(Error::InvalidArgument(format!("polynomial filter evaluated outside [-1, 1] at {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        cheb_sum(&self.coeffs, t) / self.norm
    }

    /// Filter value at an eigenvalue of the original problem.
    pub fn eval_lambda(&self, lambda: f64) -> f64 {
        self.eval_unchecked(self.map.to_unit(lambda).clamp(-1.0, 1.0))
    }

    /// Coefficients of `rho` itself (normalized).
    pub fn normalized_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c / self.norm).collect()
    }
}

/// Balance residual `N(a) - N(b)` (unnormalized) and its derivative in `gamma`.
fn balance_fn(gamma: f64, g: &[f64], diff: &[f64]) -> (f64, f64) {
    let th = gamma.acos();
    let s = th.sin().max(1e-300);
    let (mut f, mut df) = (0.0, 0.0);
    for j in 1..g.len() {
        let jt = j as f64 * th;
        f += g[j] * jt.cos() * diff[j];
        df += g[j] * j as f64 * jt.sin() / s * diff[j];
    }
    (f, df)
}

/// Center `gamma` in `(a, b)` for which the degree-`k` damped filter takes the
/// same value at `a` and `b`. Newton from the midpoint, safeguarded by
/// bisection on the sign-changing bracket.
pub fn balance_center(k: usize, a: f64, b: f64, damping: Damping) -> Result<f64> {
    if !(-1.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidArgument(format!("cannot balance on [{a}, {b}]")));
    }
    let g = damping_multipliers(k, damping);
    let ta = cheb_values(k, a);
    let tb = cheb_values(k, b);
    let diff: Vec<f64> = ta.iter().zip(&tb).map(|(x, y)| x - y).collect();
    let scale = g.iter().map(|x| x.abs()).sum::<f64>();
    let tol = 1e-13 * scale;
    let eps = 1e-14;
    let (mut lo, mut hi) = ((a + eps).min(0.999_999_999_999), (b - eps).max(-0.999_999_999_999));
    let (flo, _) = balance_fn(lo, &g, &diff);
    let (fhi, _) = balance_fn(hi, &g, &diff);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!("degree {k} filter cannot be balanced on [{a}, {b}]")));
    }
    let mut x = 0.5 * (a + b);
    const NEWTON_CAP: usize = 50;
    for it in 0..NEWTON_CAP + 200 {
        let (f, df) = balance_fn(x, &g, &diff);
        if f.abs() <= tol {
            return Ok(x);
        }
        if f.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        x = if it < NEWTON_CAP && df.is_finite() && df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-16 {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { iterations: NEWTON_CAP + 200 })
}

/// Lowest degree balanced filter for `[xi, eta]` whose endpoint values do not
/// exceed `tau`. Slices touching an end of the spectrum pin the center at that
/// end and only constrain the interior endpoint.
pub fn find_pol(xi: f64, eta: f64, bounds: &SpectralBounds, opts: &PolyOptions) -> Result<PolynomialFilter> {
    if !(xi < eta) {
        return Err(Error::InvalidArgument(format!("empty interval [{xi}, {eta}]")));
    }
    if !(opts.tau > 0.0 && opts.tau < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {}", opts.tau)));
    }
    if opts.max_deg < 2 {
        return Err(Error::InvalidArgument("maximum degree must be at least 2".into()));
    }
    if eta <= bounds.lmin || xi >= bounds.lmax {
        return Err(Error::InvalidArgument(format!(
            "interval [{xi}, {eta}] does not overlap the spectrum bounds [{}, {}]",
            bounds.lmin, bounds.lmax
        )));
    }
    let map = SpectralMap::new(bounds)?;
    let a = map.to_unit(xi).max(-1.0);
    let b = map.to_unit(eta).min(1.0);
    let side = match (a <= -1.0, b >= 1.0) {
        (true, true) => Some(BoundarySide::Both),
        (true, false) => Some(BoundarySide::Left),
        (false, true) => Some(BoundarySide::Right),
        (false, false) => None,
    };
    const PIN: f64 = 1e-12;
    let build = |k: usize| -> Result<Option<(PolynomialFilter, f64)>> {
        let gamma = match side {
            Some(BoundarySide::Left) => -1.0 + PIN,
            Some(BoundarySide::Right) => 1.0 - PIN,
            Some(BoundarySide::Both) => 0.0,
            None => match balance_center(k, a, b, opts.damping) {
                Ok(g) => g,
                // too low a degree to balance on this interval
                Err(Error::Solver(_)) if k < opts.max_deg => return Ok(None),
                Err(Error::Solver(_)) => 0.5 * (a + b),
                Err(e) => return Err(e),
            },
        };
        let f = PolynomialFilter::with_center(gamma, k, opts.damping, map)?;
        let worst = match side {
            Some(BoundarySide::Left) => f.eval_unchecked(b),
            Some(BoundarySide::Right) => f.eval_unchecked(a),
            Some(BoundarySide::Both) => f64::NEG_INFINITY,
            None => f.eval_unchecked(a).max(f.eval_unchecked(b)),
        };
        Ok(Some((f, worst)))
    };
    let mut last = None;
    for k in 2..=opts.max_deg {
        let Some((f, worst)) = build(k)? else { continue };
        let done = worst <= opts.tau;
        last = Some((f, worst));
        if done {
            break;
        }
    }
    let Some((mut f, worst)) = last else {
        return Err(Error::Solver(format!("no balanced filter up to degree {}", opts.max_deg)));
    };
    let ends = [f.eval_unchecked(a), f.eval_unchecked(b)];
    f.bar = match side {
        Some(BoundarySide::Left) => ends[1],
        Some(BoundarySide::Right) => ends[0],
        Some(BoundarySide::Both) => ends[0].min(ends[1]),
        None => ends[0].min(ends[1]),
    };
    f.cap_reached = worst > opts.tau;
    f.tau = opts.tau;
    f.t_lo = a;
    f.t_hi = b;
    f.boundary = side;
    Ok(f)
}

/// `out = rho(A_hat) v` with `A_hat = (A - c I) / d`: `k` products with `A`.
pub fn apply_pol<T: Real>(
    f: &PolynomialFilter,
    a: &dyn LinearOperator<T>,
    v: &[T],
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    cheb_recurrence(f, v, out, |x, y, c| {
        let t = Instant::now();
        a.apply(x, y)?;
        c.a_matvec += 1;
        c.t_mv += elapsed(t);
        Ok(())
    }, |x, y| {
        let cc: T = lit(f.map.c);
        let dd: T = lit(f.map.d);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - cc * *xi) / dd;
        }
    }, c)
}

/// `out = rho(B^{-1} A_hat) v`, `A_hat = (A - c B) / d`: `k` products with `A`
/// and `k` solves with `B`.
pub fn apply_pol_generalized<T: Real>(
    f: &PolynomialFilter,
    a: &dyn LinearOperator<T>,
    b_solve: &dyn Solver<T>,
    v: &[T],
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    let mut tmp = vec![T::zero(); v.len()];
    cheb_recurrence(f, v, out, |x, y, c| {
        let t = Instant::now();
        a.apply(x, &mut tmp)?;
        c.a_matvec += 1;
        c.t_mv += elapsed(t);
        let t = Instant::now();
        b_solve.solve(&tmp, y)?;
        c.b_solve += 1;
        c.t_sv += elapsed(t);
        Ok(())
    }, |x, y| {
        let cc: T = lit(f.map.c);
        let dd: T = lit(f.map.d);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - cc * *xi) / dd;
        }
    }, c)
}

/// `out = rho(A_hat B^{-1}) z` given `w = B^{-1} z`: the form the Lanczos
/// process in the `B` inner product needs. Uses `k` products with `A` and
/// `k - 1` solves with `B` (the first power reuses `w`).
pub fn apply_pol_dual<T: Real>(
    f: &PolynomialFilter,
    a: &dyn LinearOperator<T>,
    b_solve: &dyn Solver<T>,
    w: &[T],
    z: &[T],
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    let n = z.len();
    let mut tmp = vec![T::zero(); n];
    let mut first = true;
    cheb_recurrence(f, z, out, |x, y, c| {
        let src: &[T] = if first {
            first = false;
            w
        } else {
            let t = Instant::now();
            b_solve.solve(x, &mut tmp)?;
            c.b_solve += 1;
            c.t_sv += elapsed(t);
            &tmp
        };
        let t = Instant::now();
        a.apply(src, y)?;
        c.a_matvec += 1;
        c.t_mv += elapsed(t);
        Ok(())
    }, |x, y| {
        let cc: T = lit(f.map.c);
        let dd: T = lit(f.map.d);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = (*yi - cc * *xi) / dd;
        }
    }, c)
}

/// Chebyshev recurrence `v_{j+1} = 2 H v_j - v_{j-1}` where `H x` is `shift(x,
/// K x)` and `K` is `base`, accumulating `sum rho_j v_j` into `out`.
fn cheb_recurrence<T: Real>(
    f: &PolynomialFilter,
    v: &[T],
    out: &mut [T],
    mut base: impl FnMut(&[T], &mut [T], &mut OpCounters) -> Result<()>,
    shift: impl Fn(&[T], &mut [T]),
    c: &mut OpCounters,
) -> Result<()> {
    let n = v.len();
    if out.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: out.len() });
    }
    let rho: Vec<T> = f.normalized_coeffs().into_iter().map(lit).collect();
    let two: T = lit(2.0);
    for (o, x) in out.iter_mut().zip(v) {
        *o = rho[0] * *x;
    }
    if f.degree == 0 {
        return Ok(());
    }
    let mut prev = v.to_vec();
    let mut cur = vec![T::zero(); n];
    base(&prev, &mut cur, c)?;
    shift(&prev, &mut cur);
    for (o, x) in out.iter_mut().zip(&cur) {
        *o += rho[1] * *x;
    }
    let mut next = vec![T::zero(); n];
    for r in &rho[2..] {
        base(&cur, &mut next, c)?;
        shift(&cur, &mut next);
        for ((nx, p), o) in next.iter_mut().zip(&prev).zip(out.iter_mut()) {
            *nx = two * *nx - *p;
            *o += *r * *nx;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CsrMatrix;
    use proptest::prelude::*;

    fn unit_bounds() -> SpectralBounds {
        SpectralBounds::new(-1.0, 1.0).unwrap()
    }

    #[test]
    fn coefficients_by_hand() {
        let mu = chebyshev_coeffs(0.0, 2).unwrap();
        assert!((mu[0] - 0.5).abs() < 1e-16 && mu[1].abs() < 1e-16 && (mu[2] + 1.0).abs() < 1e-15);
        assert!(chebyshev_coeffs(1.0, 3).is_err());
        let near = chebyshev_coeffs(1.0 - 1e-14, 5).unwrap();
        assert!(near[1..].iter().all(|m| (m - 1.0).abs() < 1e-5));
    }

    #[test]
    fn damping_values() {
        let s = damping_multipliers(1, Damping::Sigma);
        assert_eq!(s[0], 1.0);
        assert!((s[1] - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(damping_multipliers(4, Damping::None), vec![1.0; 5]);
        for kind in [Damping::None, Damping::Sigma, Damping::Jackson] {
            assert!((damping_multipliers(7, kind)[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn undamped_quadratic_closed_form() {
        let f = PolynomialFilter::with_center(0.0, 2, Damping::None, SpectralMap { c: 0.0, d: 1.0 }).unwrap();
        for t in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert!((f.eval(t).unwrap() - (1.0 - 4.0 / 3.0 * t * t)).abs() < 1e-15);
        }
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn symmetric_interval_balances_at_zero() {
        for k in [4, 9, 20] {
            let g = balance_center(k, -0.3, 0.3, Damping::Sigma).unwrap();
            assert!(g.abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn balanced_degree_16_instance() {
        let g = balance_center(16, 0.2, 0.4, Damping::Sigma).unwrap();
        let f = PolynomialFilter::with_center(g, 16, Damping::Sigma, SpectralMap { c: 0.0, d: 1.0 }).unwrap();
        assert!((f.eval(0.2).unwrap() - f.eval(0.4).unwrap()).abs() <= 1e-10);
        assert!(g > 0.2 && g < 0.4);
    }

    /// Largest |rho| outside the main lobe, i.e. beyond the first sign
    /// changes on either side of the center.
    fn side_lobe_max(f: &PolynomialFilter) -> f64 {
        let grid: Vec<f64> = (0..=4000).map(|i| -1.0 + 2.0 * i as f64 / 4000.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| f.eval(t).unwrap()).collect();
        let peak = grid.partition_point(|&t| t < f.gamma);
        let mut lo = peak;
        while lo > 0 && vals[lo - 1] > 0.0 {
            lo -= 1;
        }
        let mut hi = peak;
        while hi + 1 < grid.len() && vals[hi + 1] > 0.0 {
            hi += 1;
        }
        vals[..lo].iter().chain(&vals[hi + 1..]).map(|v| v.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn sigma_damping_reduces_oscillation() {
        let map = SpectralMap { c: 0.0, d: 1.0 };
        let gd = balance_center(16, 0.2, 0.4, Damping::Sigma).unwrap();
        let gu = balance_center(16, 0.2, 0.4, Damping::None).unwrap();
        let damped = PolynomialFilter::with_center(gd, 16, Damping::Sigma, map).unwrap();
        let plain = PolynomialFilter::with_center(gu, 16, Damping::None, map).unwrap();
        let (d, p) = (side_lobe_max(&damped), side_lobe_max(&plain));
        assert!(d < p, "{d} vs {p}");
        assert!(d <= 0.05, "{d}");
    }

    #[test]
    fn find_pol_contract() {
        let b = unit_bounds();
        for (xi, eta) in [(0.0, 0.3), (0.2, 0.4), (-0.9, -0.85), (0.5, 0.52), (-0.2, 0.6)] {
            let f = find_pol(xi, eta, &b, &PolyOptions::default()).unwrap();
            assert!(!f.cap_reached);
            assert!((f.eval(f.gamma).unwrap() - 1.0).abs() <= 1e-14);
            let (ra, rb) = (f.eval(f.t_lo).unwrap(), f.eval(f.t_hi).unwrap());
            assert!((ra - rb).abs() <= 1e-10, "{xi} {eta}: {ra} {rb}");
            assert!(ra <= 0.8 && rb <= 0.8);
            assert!(f.degree >= 2);
            assert_eq!(f.bar, ra.min(rb));
        }
    }

    #[test]
    fn wide_interval_gets_low_degree() {
        // first slice of a 3-D Laplacian spectrum [0, 12]
        let b = SpectralBounds::new(0.0, 12.0).unwrap();
        let f = find_pol(0.0, 1.0, &b, &PolyOptions::default()).unwrap();
        assert!(f.degree < 10, "{}", f.degree);
        let wide = find_pol(2.0, 10.0, &b, &PolyOptions::default()).unwrap();
        assert!(wide.degree < 10, "{}", wide.degree);
    }

    #[test]
    fn narrower_intervals_need_no_lower_degree() {
        let b = unit_bounds();
        let mut w = 0.4;
        let mut last = 0;
        while w > 0.002 {
            let f = find_pol(0.3 - w / 2.0, 0.3 + w / 2.0, &b, &PolyOptions::default()).unwrap();
            assert!(f.degree >= last);
            last = f.degree;
            w /= 2.0;
        }
        assert!(last > 100);
    }

    #[test]
    fn boundary_slices_are_one_sided() {
        let b = SpectralBounds::new(0.0, 8.0).unwrap();
        let f = find_pol(-1.0, 0.5, &b, &PolyOptions::default()).unwrap();
        assert_eq!(f.boundary, Some(BoundarySide::Left));
        assert!(f.bar <= 0.8);
        // everything left of the interior endpoint passes the bar
        for i in 0..=100 {
            let lam = 0.5 * i as f64 / 100.0;
            assert!(f.eval_lambda(lam) >= f.bar - 1e-12);
        }
        let r = find_pol(7.5, 9.0, &b, &PolyOptions::default()).unwrap();
        assert_eq!(r.boundary, Some(BoundarySide::Right));
        let interior = find_pol(3.75, 4.25, &b, &PolyOptions::default()).unwrap();
        assert!(f.degree < interior.degree);
    }

    #[test]
    fn degree_cap_flagged() {
        let opts = PolyOptions { max_deg: 5, ..Default::default() };
        let f = find_pol(0.1, 0.11, &unit_bounds(), &opts).unwrap();
        assert!(f.cap_reached);
        assert_eq!(f.degree, 5);
    }

    #[test]
    fn rejects_bad_input() {
        let b = unit_bounds();
        assert!(find_pol(0.3, 0.3, &b, &PolyOptions::default()).is_err());
        assert!(find_pol(2.0, 3.0, &b, &PolyOptions::default()).is_err());
    }

    #[test]
    fn apply_matches_pointwise_on_diagonal() {
        let diag: Vec<f64> = (0..40).map(|i| i as f64 * 0.2).collect();
        let a = CsrMatrix::from_diagonal(&diag);
        let b = SpectralBounds::new(0.0, 7.8).unwrap();
        let f = find_pol(2.0, 3.0, &b, &PolyOptions::default()).unwrap();
        let v = vec![1.0; 40];
        let mut out = vec![0.0; 40];
        let mut c = OpCounters::default();
        apply_pol(&f, &a, &v, &mut out, &mut c).unwrap();
        for (o, d) in out.iter().zip(&diag) {
            assert!((o - f.eval_lambda(*d)).abs() <= 1e-12);
        }
        assert_eq!(c.a_matvec, f.degree as u64);
    }

    #[test]
    fn generalized_forms_agree() {
        let n = 30;
        let a = CsrMatrix::tridiagonal(n, 2.0, -1.0);
        let bm = CsrMatrix::tridiagonal(n, 4.0, 1.0);
        let fac = crate::operators::factor_spd(&bm).unwrap();
        let b = SpectralBounds::new(0.0, 1.4).unwrap();
        let f = find_pol(0.3, 0.5, &b, &PolyOptions::default()).unwrap();
        let w: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let z = bm.matvec(&w).unwrap();
        let mut c = OpCounters::default();
        let mut primal = vec![0.0; n];
        apply_pol_generalized(&f, &a, &fac, &w, &mut primal, &mut c).unwrap();
        assert_eq!((c.a_matvec, c.b_solve), (f.degree as u64, f.degree as u64));
        let mut c = OpCounters::default();
        let mut dual = vec![0.0; n];
        apply_pol_dual(&f, &a, &fac, &w, &z, &mut dual, &mut c).unwrap();
        assert_eq!((c.a_matvec, c.b_solve), (f.degree as u64, f.degree as u64 - 1));
        // dual = B primal
        let bp = bm.matvec(&primal).unwrap();
        for (x, y) in bp.iter().zip(&dual) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn coefficients_bounded(gamma in -0.999f64..0.999, k in 1usize..60) {
            let mu = chebyshev_coeffs(gamma, k).unwrap();
            prop_assert!(mu[1..].iter().all(|m| m.abs() <= 1.0));
        }

        #[test]
        fn normalized_at_center(gamma in -0.99f64..0.99, k in 2usize..400) {
            let f = PolynomialFilter::with_center(gamma, k, Damping::Sigma, SpectralMap { c: 0.0, d: 1.0 }).unwrap();
            prop_assert!((f.eval(gamma).unwrap() - 1.0).abs() <= 1e-14);
        }
    }
}
