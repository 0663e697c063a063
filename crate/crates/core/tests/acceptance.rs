//! Acceptance checks AC1..AC10. Prints one PASS/FAIL/SKIP line per check.
//!
//! The long 49^3 run (AC2) only runs with `SLICEEIG_LONG=1`. The process exits
//! nonzero on a failed check only when `SLICEEIG_STRICT=1` is set.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use num_complex::Complex;
use sliceeig::dos::{dos_count, kpm_dos, lan_dos, DosConfig, DosCurve, DosMethod};
use sliceeig::filter::{
    apply_pol, apply_pol_generalized, apply_rat, apply_rat_generalized, balance_center, find_pol, find_ratf, Damping,
    PolyOptions, PolynomialFilter, QuadRule, RatKind, RatOptions, SpectralMap,
};
use sliceeig::krylov::{cgs2_orthogonalize, lan_tr_bounds, InnerProduct, PlainOperator, SpectralBounds};
use sliceeig::matrix::{gen_laplacian, jacobi_eig, sym_tridiag_eig, CsrMatrix, DenseSym, TriDiag};
use sliceeig::operators::{factor_spd, ls_pol_approx, ChebSolver, ChebTarget, ComplexSolver, Solver};
use sliceeig::pipeline::{merge_slices, solve_slice, FilterSpec, Method, Pencil};
use sliceeig::slicer::slice_spectrum;
use sliceeig::solver::*;
use sliceeig::vector::{norm2, random_vector, rng_from_seed};
use sliceeig::counters::OpCounters;

// pinned tolerances
const EIG_TOL: f64 = 1e-8;
const RES_TOL: f64 = 1e-8;
const DRIVER_SECONDS: f64 = 60.0;
const LONG_SECONDS: f64 = 1800.0;
const SLICE_BALANCE: f64 = 0.25;
const CENTER_TOL: f64 = 1e-14;
const BALANCE_TOL: f64 = 1e-10;
const TAU: f64 = 0.8;
const HALF_TOL: f64 = 1e-10;
const APPLICATIONS: usize = 100;
const LSPOL_TOL: f64 = 1e-7;
const ITER_RATIO: f64 = 0.7;
const DOS_REL: f64 = 0.15;
const DOS_INTEGRAL_TOL: f64 = 1e-6;
const ORTH_TOL: f64 = 1e-13;
const TRIDIAG_TOL: f64 = 1e-10;
const FACTOR_TOL: f64 = 1e-10;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bounds_of(a: &CsrMatrix<f64>) -> SpectralBounds {
    lan_tr_bounds(&PlainOperator(a), &InnerProduct::Euclidean, 1e-8, 50, 1).unwrap()
}

fn max_true_residual(r: &EigenResults<f64>, a: &CsrMatrix<f64>, b: Option<&CsrMatrix<f64>>) -> f64 {
    r.eigenvectors
        .iter()
        .map(|u| rayleigh_and_residual(a, b.map(|b| b as _), u).unwrap().1)
        .fold(0.0, f64::max)
}

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn refs(f: &[sliceeig::operators::ShiftedFactor<f64>]) -> Vec<&dyn ComplexSolver<f64>> {
    f.iter().map(|x| x as &dyn ComplexSolver<f64>).collect()
}

/// Stiffness `tridiag(-1, 2, -1)` and the mass matrix `tridiag(1/6, 2/3, 1/6)`
/// scaled symmetrically by its diagonal, i.e. `tridiag(1/4, 1, 1/4)`.
fn fem_pencil(n: usize) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
    let a = CsrMatrix::tridiagonal(n, 2.0, -1.0);
    let m = CsrMatrix::tridiagonal(n, 2.0 / 3.0, 1.0 / 6.0);
    let d: Vec<f64> = m.diagonal().iter().map(|x: &f64| 1.0 / x.sqrt()).collect();
    (a, m.sym_diag_scale(&d).unwrap())
}

struct Drivers {
    names: [&'static str; 4],
}

const DRIVERS: Drivers = Drivers { names: ["ChebLanNr", "ChebLanTr", "RatLanNr", "RatLanTr"] };

fn run_driver(i: usize, a: &CsrMatrix<f64>, bounds: &SpectralBounds, iv: (f64, f64), est: usize) -> EigenResults<f64> {
    let cfg = SolverConfig::for_estimate(est);
    let prob = Problem::standard(a);
    if i < 2 {
        let f = find_pol(iv.0, iv.1, bounds, &PolyOptions::default()).unwrap();
        if i == 0 {
            cheb_lan_nr(&prob, &f, iv, &cfg).unwrap()
        } else {
            cheb_lan_tr(&prob, &f, iv, &cfg).unwrap()
        }
    } else {
        let (f, facs) = rat_filter(a, None, iv.0, iv.1, &RatOptions::single_double_pole());
        let s = refs(&facs);
        if i == 2 {
            rat_lan_nr(&prob, &f, &s, iv, &cfg).unwrap()
        } else {
            rat_lan_tr(&prob, &f, &s, iv, &cfg).unwrap()
        }
    }
}

fn kpm_estimate(a: &CsrMatrix<f64>, bounds: &SpectralBounds, iv: (f64, f64)) -> usize {
    let curve = kpm_dos(a, bounds, &DosConfig::default()).unwrap();
    dos_count(&curve, iv.0, iv.1).unwrap().ceil() as usize
}

const AC1_INSTANCES: [(&[usize], [(f64, f64); 3]); 2] = [
    (&[60, 60], [(0.4, 0.6), (0.2, 0.3), (0.5, 0.65)]),
    (&[16, 16, 16], [(0.25, 0.7), (0.75, 1.0), (0.3, 0.75)]),
];

fn ac1() -> Check {
    let (mut worst_eig, mut worst_res, mut slowest) = (0.0f64, 0.0f64, 0.0f64);
    let mut runs = 0;
    for (dims, ivs) in AC1_INSTANCES {
        let a: CsrMatrix<f64> = gen_laplacian(dims).unwrap();
        let eigs = laplacian_oracle(dims);
        let bounds = bounds_of(&a);
        for iv in ivs {
            let want = within(&eigs, iv.0, iv.1);
            ensure((20..=80).contains(&want.len()), || format!("{dims:?} {iv:?} holds {} eigenvalues", want.len()))?;
            let est = kpm_estimate(&a, &bounds, iv);
            for (d, name) in DRIVERS.names.iter().enumerate() {
                let t = Instant::now();
                let r = run_driver(d, &a, &bounds, iv, est);
                let secs = t.elapsed().as_secs_f64();
                let tag = format!("{name} on {dims:?} {iv:?}");
                same_set(&r.eigenvalues, &want, EIG_TOL).map_err(|e| format!("{tag}: {e}"))?;
                let res = max_true_residual(&r, &a, None);
                ensure(res <= RES_TOL, || format!("{tag}: residual {res:.2e}"))?;
                ensure(secs <= DRIVER_SECONDS, || format!("{tag}: {secs:.1} s"))?;
                worst_eig = worst_eig.max(max_diff(&r.eigenvalues, &want));
                worst_res = worst_res.max(res);
                slowest = slowest.max(secs);
                runs += 1;
            }
        }
    }
    Ok(format!(
        "{runs} driver runs match the oracle; max |dlambda| {worst_eig:.1e}, max residual {worst_res:.1e}, slowest {slowest:.2} s"
    ))
}

fn ac2() -> Option<Check> {
    if std::env::var("SLICEEIG_LONG").as_deref() != Ok("1") {
        return None;
    }
    Some((|| {
        let dims = [49, 49, 49];
        let a: CsrMatrix<f64> = gen_laplacian(&dims).unwrap();
        let iv = (0.40, 0.57);
        let want = within(&laplacian_oracle(&dims), iv.0, iv.1);
        let t = Instant::now();
        let bounds = bounds_of(&a);
        let est = kpm_estimate(&a, &bounds, iv);
        let r = run_driver(1, &a, &bounds, iv, est);
        let secs = t.elapsed().as_secs_f64();
        ensure(want.len() == 343, || format!("oracle holds {} eigenvalues", want.len()))?;
        same_set(&r.eigenvalues, &want, EIG_TOL)?;
        let res = max_true_residual(&r, &a, None);
        ensure(res <= RES_TOL, || format!("residual {res:.2e}"))?;
        ensure(secs <= LONG_SECONDS, || format!("{secs:.0} s"))?;
        Ok(format!("ChebLanTr found {} eigenpairs in {secs:.0} s, max residual {res:.1e}", r.len()))
    })())
}

fn ac3() -> Check {
    let dims = [20, 20, 20];
    let a: CsrMatrix<f64> = gen_laplacian(&dims).unwrap();
    let eigs = laplacian_oracle(&dims);
    let iv = (0.0, 1.0);
    let want = within(&eigs, iv.0, iv.1);
    let bounds = bounds_of(&a);
    let width = bounds.lmax - bounds.lmin;
    // the default degree smears the sharp lower edge of the spectrum over most of [0, 1]
    let curve = kpm_dos(&a, &bounds, &DosConfig { m: 600, npts: 3000, ..Default::default() }).unwrap();
    let spec = FilterSpec::Poly(PolyOptions::default());
    let est = dos_count(&curve, iv.0, iv.1).unwrap().ceil() as usize;
    let (single, _) = solve_slice(Pencil::standard(&a), &bounds, iv, &spec, Method::LanNr, est, None).unwrap();
    same_set(&single.eigenvalues, &want, EIG_TOL).map_err(|e| format!("single slice: {e}"))?;
    let mut worst = 0.0f64;
    for ns in 2..=6 {
        let set = slice_spectrum(&curve, iv.0, iv.1, ns).unwrap();
        let mean = want.len() as f64 / ns as f64;
        let mut parts = Vec::new();
        for (i, (lo, hi)) in set.iter().enumerate() {
            let count = want.iter().filter(|&&l| (i == 0 || l > lo) && l <= hi).count();
            let dev = (count as f64 - mean).abs() / mean;
            worst = worst.max(dev);
            ensure(dev <= SLICE_BALANCE, || format!("ns={ns}: slice [{lo:.5}, {hi:.5}] holds {count}, mean {mean:.1}"))?;
            let est = set.counts[i].ceil() as usize;
            let (r, _) = solve_slice(Pencil::standard(&a), &bounds, (lo, hi), &spec, Method::LanNr, est, None).unwrap();
            parts.push(r);
        }
        let merged = merge_slices(&set, parts, width).unwrap();
        same_set(&merged.eigenvalues, &single.eigenvalues, EIG_TOL).map_err(|e| format!("ns={ns} union: {e}"))?;
    }
    Ok(format!("ns=2..6 balanced within {:.0}% of the mean, unions equal the single-slice {} eigenvalues", worst * 100.0, want.len()))
}

fn max_abs_outside(f: &PolynomialFilter, lo: f64, hi: f64) -> f64 {
    (0..=4000)
        .map(|i| -1.0 + 2.0 * i as f64 / 4000.0)
        .filter(|&t| t < lo || t > hi)
        .map(|t| f.eval(t).unwrap().abs())
        .fold(0.0, f64::max)
}

fn ac4() -> Check {
    let unit = SpectralBounds::new(-1.0, 1.0).unwrap();
    let mut cases: Vec<(SpectralBounds, (f64, f64))> =
        [(0.0, 0.3), (0.2, 0.4), (-0.9, -0.85), (0.5, 0.52), (-0.2, 0.6), (0.1, 0.15), (-0.5, 0.9)]
            .into_iter()
            .map(|iv| (unit, iv))
            .collect();
    for (dims, ivs) in AC1_INSTANCES {
        let b = padded_bounds(&laplacian_oracle(dims));
        cases.extend(ivs.iter().map(|&iv| (b, iv)));
    }
    let mut worst_center = 0.0f64;
    let mut worst_balance = 0.0f64;
    for (b, (lo, hi)) in &cases {
        let f = find_pol(*lo, *hi, b, &PolyOptions::default()).unwrap();
        let (ra, rb) = (f.eval(f.t_lo).unwrap(), f.eval(f.t_hi).unwrap());
        worst_center = worst_center.max((f.eval(f.gamma).unwrap() - 1.0).abs());
        worst_balance = worst_balance.max((ra - rb).abs());
        ensure(!f.cap_reached && ra <= TAU && rb <= TAU, || format!("[{lo}, {hi}]: endpoint values {ra}, {rb}"))?;
    }
    ensure(worst_center <= CENTER_TOL, || format!("rho(gamma) off by {worst_center:.1e}"))?;
    ensure(worst_balance <= BALANCE_TOL, || format!("endpoint imbalance {worst_balance:.1e}"))?;

    // the [0, 0.3] filter on a spectrum in [-1, 1]: a 40x40 grid Laplacian
    let eigs = laplacian_oracle(&[40, 40]);
    let (e0, e1) = (eigs[0], eigs[eigs.len() - 1]);
    let mapped: Vec<f64> = eigs.iter().map(|l| -1.0 + 2.0 * (l - e0) / (e1 - e0)).collect();
    let f = find_pol(0.0, 0.3, &unit, &PolyOptions::default()).unwrap();
    let inside: Vec<f64> = mapped.iter().copied().filter(|&t| (0.0..=0.3).contains(&t)).collect();
    let low: Vec<(f64, f64)> =
        inside.iter().map(|&t| (t, f.eval(t).unwrap())).filter(|&(_, r)| r <= TAU).collect();
    ensure(low.is_empty(), || {
        format!(
            "[0, 0.3] filter (degree {}, endpoint value {:.4}): {} of {} in-interval eigenvalues map to <= 0.8, e.g. t={:.4} -> {:.4}",
            f.degree,
            f.bar,
            low.len(),
            inside.len(),
            low[0].0,
            low[0].1
        )
    })?;

    let map = SpectralMap { c: 0.0, d: 1.0 };
    let gd = balance_center(16, 0.2, 0.4, Damping::Sigma).unwrap();
    let gu = balance_center(16, 0.2, 0.4, Damping::None).unwrap();
    let damped = PolynomialFilter::with_center(gd, 16, Damping::Sigma, map).unwrap();
    let plain = PolynomialFilter::with_center(gu, 16, Damping::None, map).unwrap();
    let (d, p) = (max_abs_outside(&damped, 0.1, 0.5), max_abs_outside(&plain, 0.1, 0.5));
    ensure(d < p, || format!("sigma damping oscillation {d:.3} vs undamped {p:.3}"))?;
    Ok(format!(
        "{} filters: |rho(gamma)-1| <= {worst_center:.0e}, imbalance <= {worst_balance:.0e}; [0,0.3] wanted values > 0.8; damped oscillation {d:.3} < {p:.3}",
        cases.len()
    ))
}

fn ac5() -> Check {
    let configs = [
        RatOptions::default(),
        RatOptions { kind: RatKind::Cauchy, ..Default::default() },
        RatOptions { kind: RatKind::Cauchy, rule: QuadRule::Midpoint, ..Default::default() },
        RatOptions::single_double_pole(),
        RatOptions { p: 2, repeats: vec![3], rule: QuadRule::Midpoint, ..Default::default() },
        RatOptions { p: 4, repeats: vec![2, 1, 1, 2], ..Default::default() },
    ];
    let mut worst = 0.0f64;
    for opts in &configs {
        for (lo, hi) in [(-1.0, 1.0), (0.3, 0.9), (2.0, 5.0)] {
            let f = find_ratf(lo, hi, opts).unwrap();
            worst = worst.max((f.eval_lambda(lo) - 0.5).abs()).max((f.eval_lambda(hi) - 0.5).abs());
        }
    }
    ensure(worst <= HALF_TOL, || format!("endpoint value off 1/2 by {worst:.1e}"))?;

    let at0 = |opts: RatOptions| find_ratf(-1.0, 1.0, &opts).unwrap().eval(0.0);
    let ls = at0(RatOptions::default());
    let cg = at0(RatOptions { kind: RatKind::Cauchy, ..Default::default() });
    let cm = at0(RatOptions { kind: RatKind::Cauchy, rule: QuadRule::Midpoint, ..Default::default() });
    ensure(ls > cg && ls > cm, || format!("rho(0): LS {ls:.4}, Cauchy Gauss {cg:.4}, Cauchy midpoint {cm:.4}"))?;

    let single = |k: usize| {
        find_ratf(-1.0, 1.0, &RatOptions { p: 1, repeats: vec![k], rule: QuadRule::Midpoint, ..Default::default() })
            .unwrap()
    };
    let v: Vec<f64> = [2, 4, 6].iter().map(|&k| single(k).eval(1.5).abs()).collect();
    ensure(v[0] > v[1] && v[1] > v[2], || {
        let near: Vec<String> = [2, 4, 6].iter().map(|&k| format!("{:.4}", single(k).eval(1.1))).collect();
        format!(
            "single pole at i: |rho(1.5)| for k=2,4,6 is {:.4}, {:.4}, {:.4} (not decreasing); rho(1.1) is {}",
            v[0],
            v[1],
            v[2],
            near.join(", ")
        )
    })?;
    Ok(format!("endpoints 1/2 within {worst:.0e}; rho(0) LS {ls:.4} > {cg:.4}, {cm:.4}; |rho(1.5)| {:.4} > {:.4} > {:.4}", v[0], v[1], v[2]))
}

fn ac6() -> Check {
    let mut rng = rng_from_seed(6);
    let a: CsrMatrix<f64> = gen_laplacian(&[60, 60]).unwrap();
    let pf = find_pol(0.4, 0.6, &bounds_of(&a), &PolyOptions::default()).unwrap();
    let ropts = RatOptions { p: 3, repeats: vec![2, 1, 3], ..Default::default() };
    let sum_k = 6u64;
    let (rf, facs) = rat_filter(&a, None, 0.4, 0.6, &ropts);
    let (ga, gb) = fem_pencil(400);
    let g = factor_spd(&gb).unwrap();
    let gbounds = SpectralBounds::new(0.0, 12.0).unwrap();
    let gpf = find_pol(0.5, 0.8, &gbounds, &PolyOptions::default()).unwrap();
    let (grf, gfacs) = rat_filter(&ga, Some(&gb), 0.5, 0.8, &ropts);
    let (s, gs) = (refs(&facs), refs(&gfacs));
    let runs = APPLICATIONS as u64;
    let mut c = [OpCounters::default(), OpCounters::default(), OpCounters::default(), OpCounters::default()];
    for _ in 0..APPLICATIONS {
        let v: Vec<f64> = random_vector(3600, &mut rng);
        let mut out = vec![0.0; 3600];
        apply_pol(&pf, &a, &v, &mut out, &mut c[0]).unwrap();
        apply_rat(&rf, &s, &v, &mut out, &mut c[1]).unwrap();
        let v: Vec<f64> = random_vector(400, &mut rng);
        let mut out = vec![0.0; 400];
        apply_pol_generalized(&gpf, &ga, &g, &v, &mut out, &mut c[2]).unwrap();
        apply_rat_generalized(&grf, &gs, &gb, &v, &mut out, &mut c[3]).unwrap();
    }
    let k = pf.degree as u64;
    let gk = gpf.degree as u64;
    let counts = |c: &OpCounters| (c.a_matvec, c.b_solve, c.shift_solve, c.b_matvec);
    let want = [(runs * k, 0, 0, 0), (0, 0, runs * sum_k, 0), (runs * gk, runs * gk, 0, 0), (0, 0, runs * sum_k, runs * sum_k)];
    let names = ["standard poly", "standard rational", "generalized poly", "generalized rational"];
    for i in 0..4 {
        ensure(counts(&c[i]) == want[i], || {
            format!("{}: (A, B-solve, shift, B) = {:?}, expected {:?}", names[i], counts(&c[i]), want[i])
        })?;
    }
    Ok(format!(
        "{APPLICATIONS} applications each: k={k} A; sum k_j={sum_k} shift solves; k={gk} A + k B-solves; sum k_j shift solves + sum k_j B products"
    ))
}

/// Dense generalized eigenvalues through a Cholesky factor and Jacobi sweeps.
fn dense_pencil_oracle(a: &CsrMatrix<f64>, b: &CsrMatrix<f64>) -> Vec<f64> {
    let n = a.n();
    let (ad, bd) = (a.to_dense().unwrap(), b.to_dense().unwrap());
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = bd.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = bd.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    // C = L^{-1} A L^{-T}, column by column
    let lsolve = |rhs: &mut [f64]| {
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * rhs[k];
            }
            rhs[i] = s / l[i * n + i];
        }
    };
    let mut x = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| ad.get(i, j)).collect();
        lsolve(&mut col);
        x[j] = col;
    }
    // x[j] = L^{-1} A e_j; rows of L^{-1} A are columns of A L^{-T}
    let mut c = DenseSym::zeros(n);
    for i in 0..n {
        let mut row: Vec<f64> = (0..n).map(|j| x[j][i]).collect();
        lsolve(&mut row);
        for (j, v) in row.into_iter().enumerate() {
            if j >= i {
                c.set(i, j, v);
            }
        }
    }
    let (mut e, _) = jacobi_eig(&c).unwrap();
    e.sort_by(f64::total_cmp);
    e
}

fn ac7() -> Check {
    let n = 400;
    let (a, b) = fem_pencil(n);
    let eigs = dense_pencil_oracle(&a, &b);
    let analytic = fem_pencil_oracle(n, 1.5);
    let cross = max_diff(&eigs, &analytic);
    ensure(cross <= 1e-10, || format!("dense oracle vs closed form: {cross:.1e}"))?;
    let i0 = 100;
    let (lo, hi) = (0.5 * (eigs[i0 - 1] + eigs[i0]), 0.5 * (eigs[i0 + 11] + eigs[i0 + 12]));
    let want = within(&eigs, lo, hi);
    ensure(want.len() == 12, || format!("interval holds {}", want.len()))?;
    let g = factor_spd(&b).unwrap();
    let t = transform_with_cholesky(&a, &g).unwrap();
    let bounds = lan_tr_bounds(&PlainOperator(&t), &InnerProduct::Euclidean, 1e-8, 50, 1).unwrap();
    let cfg = SolverConfig::for_estimate(12);
    let pf = find_pol(lo, hi, &bounds, &PolyOptions::default()).unwrap();
    let (rf, facs) = rat_filter(&a, Some(&b), lo, hi, &RatOptions::single_double_pole());
    let s = refs(&facs);
    let tsolvers: Vec<_> = facs.iter().map(|f| t.shifted_solver(f)).collect();
    let ts: Vec<&dyn ComplexSolver<f64>> = tsolvers.iter().map(|x| x as _).collect();

    let mut runs: Vec<(&str, EigenResults<f64>)> = Vec::new();
    let mut r = cheb_lan_nr(&Problem::standard(&t), &pf, (lo, hi), &cfg).unwrap();
    t.back_map_results(&mut r).unwrap();
    runs.push(("Cholesky form, polynomial", r));
    let mut r = rat_lan_nr(&Problem::standard(&t), &rf, &ts, (lo, hi), &cfg).unwrap();
    t.back_map_results(&mut r).unwrap();
    runs.push(("Cholesky form, rational", r));
    runs.push(("B-Lanczos, polynomial", cheb_lan_nr(&Problem::generalized(&a, &b, Some(&g)), &pf, (lo, hi), &cfg).unwrap()));
    runs.push(("B-Lanczos, rational", rat_lan_nr(&Problem::generalized(&a, &b, None), &rf, &s, (lo, hi), &cfg).unwrap()));
    let mut worst = 0.0f64;
    for (name, r) in &runs {
        same_set(&r.eigenvalues, &want, EIG_TOL).map_err(|e| format!("{name}: {e}"))?;
        let res = max_true_residual(r, &a, Some(&b));
        ensure(res <= RES_TOL, || format!("{name}: residual {res:.2e}"))?;
        worst = worst.max(max_diff(&r.eigenvalues, &want));
    }

    let bb = lan_tr_bounds(&PlainOperator(&b), &InnerProduct::Euclidean, 1e-8, 50, 1).unwrap();
    let approx = ls_pol_approx(ChebTarget::Inverse, bb.lmin, bb.lmax, 1e-12, 500).unwrap();
    let cheb = ChebSolver { approx, op: &b };
    let r = cheb_lan_nr(&Problem::generalized(&a, &b, Some(&cheb)), &pf, (lo, hi), &cfg).unwrap();
    let direct = &runs[2].1;
    same_set(&r.eigenvalues, &direct.eigenvalues, LSPOL_TOL).map_err(|e| format!("lsPol B-solves: {e}"))?;
    let dl = max_diff(&r.eigenvalues, &direct.eigenvalues);
    Ok(format!("4 paths match the dense oracle (max {worst:.1e}) on 12 eigenvalues; lsPol B-solves vs direct {dl:.1e}"))
}

fn ac8() -> Check {
    let a: CsrMatrix<f64> = gen_laplacian(&[60, 60]).unwrap();
    let bounds = bounds_of(&a);
    let iv = (0.4, 0.6);
    let est = kpm_estimate(&a, &bounds, iv);
    let cheb = run_driver(0, &a, &bounds, iv, est);
    let rat = run_driver(2, &a, &bounds, iv, est);
    let ratio = rat.stats.niter as f64 / cheb.stats.niter as f64;
    let msg = format!("niter RatLanNr {} vs ChebLanNr {} (ratio {ratio:.2})", rat.stats.niter, cheb.stats.niter);
    ensure(ratio <= ITER_RATIO, || msg.clone())?;
    Ok(msg)
}

fn curve_integral(c: &DosCurve) -> f64 {
    c.xdos.windows(2).zip(c.ydos.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn ac9() -> Check {
    let mut instances: Vec<(Vec<usize>, Vec<(f64, f64)>)> =
        AC1_INSTANCES.iter().map(|(d, iv)| (d.to_vec(), iv.to_vec())).collect();
    instances.push((vec![20, 20, 20], vec![(0.0, 1.0), (1.0, 2.0), (5.0, 7.0)]));
    instances.push((vec![100, 100], vec![(0.5, 1.0), (3.0, 4.0), (6.0, 7.5)]));
    let mut worst = (0.0f64, String::new());
    let mut worst_int = 0.0f64;
    let mut floor_ok = true;
    for (dims, ivs) in &instances {
        let a: CsrMatrix<f64> = gen_laplacian(dims).unwrap();
        let eigs = laplacian_oracle(dims);
        let bounds = bounds_of(&a);
        for method in [DosMethod::Kpm, DosMethod::Lanczos] {
            let cfg = DosConfig { method, ..Default::default() };
            let curve = match method {
                DosMethod::Kpm => kpm_dos(&a, &bounds, &cfg),
                DosMethod::Lanczos => lan_dos(&a, &bounds, &cfg),
            }
            .unwrap();
            let again = match method {
                DosMethod::Kpm => kpm_dos(&a, &bounds, &cfg),
                DosMethod::Lanczos => lan_dos(&a, &bounds, &cfg),
            }
            .unwrap();
            ensure(curve == again, || format!("{method:?} on {dims:?} is not reproducible"))?;
            worst_int = worst_int.max((curve_integral(&curve) - 1.0).abs());
            for &(lo, hi) in ivs {
                let truth = within(&eigs, lo, hi).len() as f64;
                let est = dos_count(&curve, lo, hi).unwrap();
                let rel = (est - truth).abs() / truth;
                floor_ok &= (est - truth).abs() <= (DOS_REL * truth).max(10.0);
                if rel > worst.0 {
                    worst = (rel, format!("{method:?} {dims:?} [{lo}, {hi}]: {est:.1} vs {truth}"));
                }
            }
        }
    }
    ensure(worst_int <= DOS_INTEGRAL_TOL, || format!("integral off by {worst_int:.1e}"))?;
    ensure(worst.0 <= DOS_REL, || {
        format!("count error {:.1}% ({}); absolute error within max(15%, 10): {}", worst.0 * 100.0, worst.1, floor_ok)
    })?;
    Ok(format!("worst count error {:.1}% ({}); integrals within {worst_int:.0e}; runs reproducible", worst.0 * 100.0, worst.1))
}

fn ac10() -> Check {
    let mut rng = rng_from_seed(10);
    // Gram-Schmidt on nearly dependent input
    let (n, k) = (3000, 80);
    let base: Vec<f64> = random_vector(n, &mut rng);
    let mut q: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k {
        let mut v: Vec<f64> = random_vector(n, &mut rng);
        for (x, b) in v.iter_mut().zip(&base) {
            *x = b + 1e-6 * *x;
        }
        let refs: Vec<&[f64]> = q.iter().map(|x| x.as_slice()).collect();
        let r = cgs2_orthogonalize(&mut v, &refs, &refs, false);
        ensure(r.norm > 0.0, || "Gram-Schmidt lost a vector".into())?;
        v.iter_mut().for_each(|x| *x /= r.norm);
        q.push(v);
    }
    let mut orth = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            orth = orth.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    ensure(orth <= ORTH_TOL, || format!("orthogonality {orth:.1e}"))?;

    let m = 150;
    let alpha: Vec<f64> = random_vector(m, &mut rng);
    let beta: Vec<f64> = random_vector(m - 1, &mut rng);
    let t = TriDiag::new(alpha, beta).unwrap();
    let (ev, _) = sym_tridiag_eig(&t, true).unwrap();
    let (mut dv, _) = jacobi_eig(&t.to_dense()).unwrap();
    dv.sort_by(f64::total_cmp);
    let tri = max_diff(&ev, &dv);
    ensure(tri <= TRIDIAG_TOL, || format!("tridiagonal eigenvalues off by {tri:.1e}"))?;

    let lap: CsrMatrix<f64> = gen_laplacian(&[30, 30]).unwrap();
    let (_, mass) = fem_pencil(900);
    let mut spd = 0.0f64;
    let mut shifted = 0.0f64;
    for mat in [&lap, &mass] {
        let g = factor_spd(mat).unwrap();
        for _ in 0..APPLICATIONS {
            let b: Vec<f64> = random_vector(900, &mut rng);
            let mut x = vec![0.0; 900];
            g.solve(&b, &mut x).unwrap();
            let bx = mat.matvec(&x).unwrap();
            let r: Vec<f64> = bx.iter().zip(&b).map(|(u, v)| u - v).collect();
            spd = spd.max(norm2(&r) / norm2(&b));
        }
    }
    for (sigma, b) in [(Complex::new(4.1, 0.3), None), (Complex::new(1.2, 0.05), Some(&mass))] {
        let f = sliceeig::operators::factor_shifted(&lap, b, sigma).unwrap();
        for _ in 0..APPLICATIONS {
            let re: Vec<f64> = random_vector(900, &mut rng);
            let im: Vec<f64> = random_vector(900, &mut rng);
            let rhs: Vec<Complex<f64>> = re.iter().zip(&im).map(|(&r, &i)| Complex::new(r, i)).collect();
            let mut x = vec![Complex::new(0.0, 0.0); 900];
            f.solve(&rhs, &mut x).unwrap();
            let mut ax = vec![Complex::new(0.0, 0.0); 900];
            lap.matvec_complex(&x, &mut ax).unwrap();
            let mut bx = x.clone();
            if let Some(b) = b {
                b.matvec_complex(&x, &mut bx).unwrap();
            }
            let num: f64 = ax.iter().zip(&bx).zip(&rhs).map(|((a, b), r)| (a - sigma * b - r).norm_sqr()).sum();
            let den: f64 = rhs.iter().map(|r| r.norm_sqr()).sum();
            shifted = shifted.max((num / den).sqrt());
        }
    }
    ensure(spd <= FACTOR_TOL, || format!("SPD solve residual {spd:.1e}"))?;
    ensure(shifted <= FACTOR_TOL, || format!("shifted solve residual {shifted:.1e}"))?;
    Ok(format!(
        "CGS2 orthogonality {orth:.0e}; tridiagonal vs Jacobi {tri:.0e}; SPD residual {spd:.0e}; shifted residual {shifted:.0e}"
    ))
}

fn run(f: impl FnOnce() -> Option<Check>) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(None) => Outcome::Skip("set SLICEEIG_LONG=1 to run".into()),
        Ok(Some(Ok(m))) => Outcome::Pass(m),
        Ok(Some(Err(m))) => Outcome::Fail(m),
        Err(p) => Outcome::Fail(
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()),
        ),
    }
}

fn main() {
    let checks: Vec<(&str, &str, Box<dyn FnOnce() -> Option<Check>>)> = vec![
        ("AC1", "eigencount fidelity", Box::new(|| Some(ac1()))),
        ("AC2", "49^3 spot check", Box::new(ac2)),
        ("AC3", "slicing balance and seams", Box::new(|| Some(ac3()))),
        ("AC4", "polynomial filter properties", Box::new(|| Some(ac4()))),
        ("AC5", "rational filter properties", Box::new(|| Some(ac5()))),
        ("AC6", "operation accounting", Box::new(|| Some(ac6()))),
        ("AC7", "generalized correctness", Box::new(|| Some(ac7()))),
        ("AC8", "iteration economy", Box::new(|| Some(ac8()))),
        ("AC9", "DOS accuracy", Box::new(|| Some(ac9()))),
        ("AC10", "numerical kernels", Box::new(|| Some(ac10()))),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, f) in checks {
        let t = Instant::now();
        let out = run(f);
        let secs = t.elapsed().as_secs_f64();
        match out {
            Outcome::Pass(m) => println!("{id} PASS {title} ({secs:.1} s): {m}"),
            Outcome::Fail(m) => {
                failed += 1;
                println!("{id} FAIL {title} ({secs:.1} s): {m}");
            }
            Outcome::Skip(m) => println!("{id} SKIP {title}: {m}"),
        }
    }
    if failed > 0 && std::env::var("SLICEEIG_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
