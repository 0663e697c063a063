//! Rational filters: Cauchy quadrature filters and weighted least-squares
//! filters with repeated poles.

use std::time::Instant;

use num_complex::Complex;

use super::quad::{gauss_legendre, push_panel};
use crate::counters::{elapsed, OpCounters};
use crate::error::{Error, Result};
use crate::operators::{ComplexSolver, LinearOperator, ShiftedFactor, ShiftedSystem};
use crate::scalar::{lit, Real};

type C64 = Complex<f64>;

/// Upper bound on the total pole multiplicity (conditioning guard).
pub const MAX_TOTAL_MULTIPLICITY: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    GaussLegendre,
    Midpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RatKind {
    Cauchy,
    Ls,
}

/// Weight of the least-squares fit: `inside` on `[-1, 1]`, `outside`
/// elsewhere, integrated over `[-beta, beta]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RatWeight {
    pub inside: f64,
    pub outside: f64,
    pub beta: f64,
}

impl Default for RatWeight {
    fn default() -> Self {
        Self { inside: 0.01, outside: 1.0, beta: 8.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatOptions {
    /// Number of poles in the upper half plane.
    pub p: usize,
    /// Multiplicity of each pole; a single entry applies to all poles.
    pub repeats: Vec<usize>,
    pub rule: QuadRule,
    pub kind: RatKind,
    pub weight: RatWeight,
}

impl Default for RatOptions {
    fn default() -> Self {
        Self { p: 3, repeats: vec![1], rule: QuadRule::GaussLegendre, kind: RatKind::Ls, weight: RatWeight::default() }
    }
}

impl RatOptions {
    /// One pole (the midpoint-rule pole at the top of the circle) repeated
    /// twice, fitted by least squares.
    pub fn single_double_pole() -> Self {
        Self { p: 1, repeats: vec![2], rule: QuadRule::Midpoint, kind: RatKind::Ls, weight: RatWeight::default() }
    }

    fn multiplicities(&self) -> Result<Vec<usize>> {
        let mult = match self.repeats.len() {
            1 => vec![self.repeats[0]; self.p],
            l if l == self.p => self.repeats.clone(),
            l => {
                return Err(Error::InvalidArgument(format!("{l} pole multiplicities given for {} poles", self.p)));
            }
        };
        if mult.iter().any(|&k| k == 0) {
            return Err(Error::InvalidArgument("pole multiplicities must be positive".into()));
        }
        let total: usize = mult.iter().sum();
        if total > MAX_TOTAL_MULTIPLICITY {
            return Err(Error::TooLarge { what: "total pole multiplicity", value: total, limit: MAX_TOTAL_MULTIPLICITY });
        }
        Ok(mult)
    }
}

/// `rho(t) = 2 Re sum_j sum_k alpha_jk / (t - sigma_j)^k` on the variable
/// `t = (lambda - center) / radius`, scaled so that `rho(+-1) = 1/2`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RationalFilter {
    /// Poles on the mapped variable, all with positive imaginary part.
    pub poles: Vec<C64>,
    pub multiplicities: Vec<usize>,
    /// `coeffs[j][k-1]` multiplies `1 / (t - sigma_j)^k`; scale applied.
    pub coeffs: Vec<Vec<C64>>,
    /// `2 rho_raw(boundary)`, already divided out of `coeffs`.
    pub scale: f64,
    pub center: f64,
    pub radius: f64,
    pub bar: f64,
    pub kind: RatKind,
    pub rule: QuadRule,
    pub weight: RatWeight,
}

fn eval_raw(poles: &[C64], coeffs: &[Vec<C64>], t: f64) -> f64 {
    let z = C64::new(t, 0.0);
    let mut s = C64::new(0.0, 0.0);
    for (p, cs) in poles.iter().zip(coeffs) {
        let r = (z - p).inv();
        let mut pw = r;
        for c in cs {
            s += c * pw;
            pw *= r;
        }
    }
    2.0 * s.re
}

/// Poles on the upper unit semicircle and the coefficients of the
/// corresponding quadrature of the Cauchy integral of the step function on
/// `[-1, 1]`.
pub fn cauchy_poles(p: usize, rule: QuadRule) -> Result<(Vec<C64>, Vec<C64>)> {
    if p == 0 {
        return Err(Error::InvalidArgument("need at least one pole".into()));
    }
    let pi = std::f64::consts::PI;
    // angles in (0, pi) and weights of the full-circle rule (conjugates implied)
    let (theta, wts): (Vec<f64>, Vec<f64>) = match rule {
        QuadRule::Midpoint => (0..p).map(|j| ((2 * j + 1) as f64 * pi / (2 * p) as f64, pi / p as f64)).unzip(),
        QuadRule::GaussLegendre => {
            let (x, w) = gauss_legendre(p);
            x.iter().zip(&w).map(|(x, w)| (pi / 2.0 * (x + 1.0), pi / 2.0 * w)).unzip()
        }
    };
    let poles: Vec<C64> = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let coeffs = poles.iter().zip(&wts).map(|(s, w)| -s * (w / (2.0 * pi))).collect();
    Ok((poles, coeffs))
}

fn ls_nodes(weight: &RatWeight) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(64);
    let (mut x, mut w) = (Vec::new(), Vec::new());
    push_panel(-weight.beta, -1.0, &rule, &mut x, &mut w);
    push_panel(-1.0, 1.0, &rule, &mut x, &mut w);
    push_panel(1.0, weight.beta, &rule, &mut x, &mut w);
    let h = x.iter().map(|t| if t.abs() <= 1.0 { 1.0 } else { 0.0 }).collect();
    let ww = x
        .iter()
        .zip(&w)
        .map(|(t, q)| q * if t.abs() <= 1.0 { weight.inside } else { weight.outside })
        .collect();
    (x, ww, h)
}

/// Weighted squared distance between the step function on `[-1, 1]` and the
/// raw (unscaled) rational function, by the same quadrature the fit uses.
pub fn ls_objective(poles: &[C64], coeffs: &[Vec<C64>], weight: &RatWeight) -> f64 {
    let (x, w, h) = ls_nodes(weight);
    x.iter().zip(&w).zip(&h).map(|((t, w), h)| w * (h - eval_raw(poles, coeffs, *t)).powi(2)).sum()
}

/// Least-squares coefficients for the given poles and multiplicities.
pub fn ls_coeffs(poles: &[C64], mult: &[usize], weight: &RatWeight) -> Result<Vec<Vec<C64>>> {
    if poles.len() != mult.len() {
        return Err(Error::DimensionMismatch { expected: poles.len(), got: mult.len() });
    }
    if poles.iter().any(|p| !(p.im > 0.0)) {
        return Err(Error::InvalidArgument("poles must lie in the upper half plane".into()));
    }
    if !(weight.inside > 0.0 && weight.outside > 0.0 && weight.beta > 1.0) {
        return Err(Error::InvalidArgument("weights must be positive and beta > 1".into()));
    }
    let total: usize = mult.iter().sum();
    if total > MAX_TOTAL_MULTIPLICITY {
        return Err(Error::TooLarge { what: "total pole multiplicity", value: total, limit: MAX_TOTAL_MULTIPLICITY });
    }
    let (x, w, h) = ls_nodes(weight);
    // real basis: 2 Re phi and -2 Im phi for every phi = (t - sigma_j)^{-k}
    let nb = 2 * total;
    let mut owner = Vec::with_capacity(nb);
    for (j, &k) in mult.iter().enumerate() {
        for kk in 0..k {
            owner.push((j, kk));
            owner.push((j, kk));
        }
    }
    let mut f = vec![0.0; nb];
    let mut g = vec![0.0; nb * nb];
    let mut rhs = vec![0.0; nb];
    for ((t, wq), hq) in x.iter().zip(&w).zip(&h) {
        let mut idx = 0;
        for (p, &k) in poles.iter().zip(mult) {
            let r = (C64::new(*t, 0.0) - p).inv();
            let mut pw = r;
            for _ in 0..k {
                f[idx] = 2.0 * pw.re;
                f[idx + 1] = -2.0 * pw.im;
                idx += 2;
                pw *= r;
            }
        }
        for a in 0..nb {
            rhs[a] += wq * hq * f[a];
            for b in 0..=a {
                g[a * nb + b] += wq * f[a] * f[b];
            }
        }
    }
    let sol = solve_gram(&mut g, &rhs, nb).map_err(|bad| {
        let (pole, term) = owner[bad];
        Error::RankDeficient { pole, term: term + 1 }
    })?;
    let mut coeffs = Vec::with_capacity(poles.len());
    let mut idx = 0;
    for &k in mult {
        let mut cs = Vec::with_capacity(k);
        for _ in 0..k {
            cs.push(C64::new(sol[idx], sol[idx + 1]));
            idx += 2;
        }
        coeffs.push(cs);
    }
    Ok(coeffs)
}

/// Solves the SPD system held in the lower triangle of `g` with diagonal
/// equilibration and diagonally pivoted Cholesky. On a (numerically)
/// dependent basis returns the index of the offending basis function.
fn solve_gram(g: &mut [f64], rhs: &[f64], n: usize) -> std::result::Result<Vec<f64>, usize> {
    let mut d = vec![0.0; n];
    for i in 0..n {
        let gi = g[i * n + i];
        if !(gi > 0.0) {
            return Err(i);
        }
        d[i] = 1.0 / gi.sqrt();
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = g[i * n + j] * d[i] * d[j];
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let tol = 1e-14;
    for k in 0..n {
        let piv = (k..n).max_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y])).unwrap();
        if !(a[piv * n + piv] > tol) {
            return Err(perm[piv]);
        }
        if piv != k {
            perm.swap(k, piv);
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k, r * n + piv);
            }
        }
        let l = a[k * n + k].sqrt();
        a[k * n + k] = l;
        for i in k + 1..n {
            a[i * n + k] /= l;
        }
        // trailing Schur complement, kept symmetric
        for i in k + 1..n {
            let lik = a[i * n + k];
            for j in k + 1..=i {
                let v = a[i * n + j] - lik * a[j * n + k];
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
    }
    // solve P^T (D G D) P y = P^T D rhs
    let b: Vec<f64> = perm.iter().map(|&p| rhs[p] * d[p]).collect();
    let mut y = b;
    for i in 0..n {
        for j in 0..i {
            y[i] -= a[i * n + j] * y[j];
        }
        y[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            y[i] -= a[j * n + i] * y[j];
        }
        y[i] /= a[i * n + i];
    }
    let mut x = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k] * d[p];
    }
    Ok(x)
}

/// Builds the rational filter for `[xi, eta]`.
pub fn find_ratf(xi: f64, eta: f64, opts: &RatOptions) -> Result<RationalFilter> {
    if !(xi < eta) {
        return Err(Error::InvalidArgument(format!("empty interval [{xi}, {eta}]")));
    }
    let mult = opts.multiplicities()?;
    let (poles, cauchy) = cauchy_poles(opts.p, opts.rule)?;
    let raw: Vec<Vec<C64>> = match opts.kind {
        RatKind::Cauchy => {
            if mult.iter().any(|&k| k != 1) {
                return Err(Error::InvalidArgument("Cauchy filters use simple poles; use the least-squares kind".into()));
            }
            cauchy.into_iter().map(|c| vec![c]).collect()
        }
        RatKind::Ls => ls_coeffs(&poles, &mult, &opts.weight)?,
    };
    let scale = eval_raw(&poles, &raw, -1.0) + eval_raw(&poles, &raw, 1.0);
    if !(scale.abs() > 0.0) || !scale.is_finite() {
        return Err(Error::Solver("rational filter vanishes at the interval ends".into()));
    }
    let coeffs = raw.iter().map(|cs| cs.iter().map(|c| c / scale).collect()).collect();
    Ok(RationalFilter {
        poles,
        multiplicities: mult,
        coeffs,
        scale,
        center: (xi + eta) / 2.0,
        radius: (eta - xi) / 2.0,
        bar: 0.5,
        kind: opts.kind,
        rule: opts.rule,
        weight: opts.weight,
    })
}

impl RationalFilter {
    /// Value on the mapped variable (interval at `[-1, 1]`).
    pub fn eval(&self, t: f64) -> f64 {
        eval_raw(&self.poles, &self.coeffs, t)
    }

    pub fn eval_lambda(&self, lambda: f64) -> f64 {
        self.eval((lambda - self.center) / self.radius)
    }

    /// Shift of pole `j` in the original variable.
    pub fn shift(&self, j: usize) -> C64 {
        self.poles[j] * self.radius + self.center
    }

    pub fn shifts(&self) -> Vec<C64> {
        (0..self.poles.len()).map(|j| self.shift(j)).collect()
    }

    /// Coefficient of `(lambda - shift_j)^{-k}` in the original variable.
    pub fn lambda_coeff(&self, j: usize, k: usize) -> C64 {
        self.coeffs[j][k - 1] * self.radius.powi(k as i32)
    }

    pub fn total_multiplicity(&self) -> usize {
        self.multiplicities.iter().sum()
    }
}

/// Factors `A - shift_j B` for every pole of `f`.
pub fn factor_poles<T: Real>(sys: &ShiftedSystem<T>, f: &RationalFilter) -> Result<Vec<ShiftedFactor<T>>> {
    f.shifts()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            sys.factor(Complex::new(lit(s.re), lit(s.im)))
                .map_err(|e| Error::PoleSolve { pole: j, source: Box::new(e) })
        })
        .collect()
}

fn check_solvers<T>(f: &RationalFilter, solvers: &[&dyn ComplexSolver<T>]) -> Result<()> {
    if solvers.len() != f.poles.len() {
        return Err(Error::InvalidArgument(format!("{} pole solvers for {} poles", solvers.len(), f.poles.len())));
    }
    Ok(())
}

fn apply_inner<T: Real>(
    f: &RationalFilter,
    solvers: &[&dyn ComplexSolver<T>],
    b: Option<&dyn LinearOperator<T>>,
    v: &[T],
    bv: Option<&[T]>,
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    check_solvers(f, solvers)?;
    let n = v.len();
    if out.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: out.len() });
    }
    let two: T = lit(2.0);
    out.iter_mut().for_each(|o| *o = T::zero());
    let mut acc = vec![Complex::new(T::zero(), T::zero()); n];
    let mut x: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); n];
    let mut rhs: Vec<Complex<T>> = vec![Complex::new(T::zero(), T::zero()); n];
    let (mut re, mut im, mut bre, mut bim) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    for (j, solver) in solvers.iter().enumerate() {
        acc.iter_mut().for_each(|a| *a = Complex::new(T::zero(), T::zero()));
        for k in 1..=f.multiplicities[j] {
            // rhs = B x (or B v for the first power)
            match (b, k, bv) {
                (None, 1, _) => rhs.iter_mut().zip(v).for_each(|(r, vi)| *r = Complex::new(*vi, T::zero())),
                (None, _, _) => rhs.copy_from_slice(&x),
                (Some(_), 1, Some(bv)) => rhs.iter_mut().zip(bv).for_each(|(r, vi)| *r = Complex::new(*vi, T::zero())),
                (Some(bop), _, _) => {
                    let t = Instant::now();
                    if k == 1 {
                        bop.apply(v, &mut bre)?;
                        bim.iter_mut().for_each(|y| *y = T::zero());
                    } else {
                        for (i, xi) in x.iter().enumerate() {
                            re[i] = xi.re;
                            im[i] = xi.im;
                        }
                        bop.apply(&re, &mut bre)?;
                        bop.apply(&im, &mut bim)?;
                    }
                    c.b_matvec += 1;
                    c.t_mv += elapsed(t);
                    for ((r, a), b) in rhs.iter_mut().zip(&bre).zip(&bim) {
                        *r = Complex::new(*a, *b);
                    }
                }
            }
            let t = Instant::now();
            solver.solve(&rhs, &mut x).map_err(|e| Error::PoleSolve { pole: j, source: Box::new(e) })?;
            c.shift_solve += 1;
            c.t_sv += elapsed(t);
            let a = f.lambda_coeff(j, k);
            let a: Complex<T> = Complex::new(lit(a.re), lit(a.im));
            for (s, xi) in acc.iter_mut().zip(&x) {
                *s += a * *xi;
            }
        }
        for (o, s) in out.iter_mut().zip(&acc) {
            *o += two * s.re;
        }
    }
    Ok(())
}

/// `out = rho(A) v` for the standard problem: one shifted solve per unit of
/// pole multiplicity.
pub fn apply_rat<T: Real>(
    f: &RationalFilter,
    solvers: &[&dyn ComplexSolver<T>],
    v: &[T],
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    apply_inner(f, solvers, None, v, None, out, c)
}

/// `out = rho(B^{-1} A) v` using `[(A - sigma B)^{-1} B]^k`: one shifted solve
/// and one product with `B` per unit of pole multiplicity.
pub fn apply_rat_generalized<T: Real>(
    f: &RationalFilter,
    solvers: &[&dyn ComplexSolver<T>],
    b: &dyn LinearOperator<T>,
    v: &[T],
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    apply_inner(f, solvers, Some(b), v, None, out, c)
}

/// As [`apply_rat_generalized`] with `B v` supplied, so the first power of
/// every pole needs no product with `B`.
pub fn apply_rat_generalized_with_bv<T: Real>(
    f: &RationalFilter,
    solvers: &[&dyn ComplexSolver<T>],
    b: &dyn LinearOperator<T>,
    v: &[T],
    bv: &[T],
    out: &mut [T],
    c: &mut OpCounters,
) -> Result<()> {
    apply_inner(f, solvers, Some(b), v, Some(bv), out, c)
}
