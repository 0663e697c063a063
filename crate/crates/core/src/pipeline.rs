//! Solving a slice from a sparse matrix or pencil in one call, and merging
//! the results of adjacent slices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{factor_poles, find_pol, find_ratf, PolyOptions, RatOptions};
use crate::krylov::SpectralBounds;
use crate::matrix::CsrMatrix;
use crate::operators::{ComplexSolver, ShiftedSystem, SpdFactor};
use crate::scalar::{to_f64, Real};
use crate::slicer::SliceSet;
use crate::solver::{cheb_lan_nr, cheb_lan_tr, cheb_si, rat_lan_nr, rat_lan_tr, EigenResults, Problem, SolverConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum FilterSpec {
    Poly(PolyOptions),
    Rat(RatOptions),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Non-restarted Lanczos.
    LanNr,
    /// Thick-restart Lanczos.
    LanTr,
    /// Subspace iteration (polynomial filter only).
    Subspace,
}

/// What was built for a slice, for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterInfo {
    Poly { degree: usize, gamma: f64, bar: f64, cap_reached: bool },
    Rat { poles: Vec<[f64; 2]>, multiplicities: Vec<usize>, bar: f64 },
}

/// `A`, or the pencil `(A, B)` with a factorization of `B`.
#[derive(Clone, Copy)]
pub struct Pencil<'a, T> {
    pub a: &'a CsrMatrix<T>,
    pub b: Option<(&'a CsrMatrix<T>, &'a SpdFactor<T>)>,
}

impl<'a, T: Real> Pencil<'a, T> {
    pub fn standard(a: &'a CsrMatrix<T>) -> Self {
        Self { a, b: None }
    }

    pub fn generalized(a: &'a CsrMatrix<T>, b: &'a CsrMatrix<T>, factor: &'a SpdFactor<T>) -> Self {
        Self { a, b: Some((b, factor)) }
    }
}

/// Builds the filter for `interval`, factors the shifted systems if needed and
/// runs the chosen driver. `est_count` sizes the default configuration and the
/// subspace iteration block; `cfg` overrides the configuration when given.
pub fn solve_slice<T: Real>(
    pencil: Pencil<'_, T>,
    bounds: &SpectralBounds,
    interval: (f64, f64),
    filter: &FilterSpec,
    method: Method,
    est_count: usize,
    cfg: Option<&SolverConfig>,
) -> Result<(EigenResults<T>, FilterInfo)> {
    let default_cfg = SolverConfig::for_estimate(est_count);
    let cfg = cfg.unwrap_or(&default_cfg);
    let prob = match pencil.b {
        None => Problem::standard(pencil.a),
        Some((b, g)) => Problem::generalized(pencil.a, b, Some(g)),
    };
    match filter {
        FilterSpec::Poly(opts) => {
            let f = find_pol(interval.0, interval.1, bounds, opts)?;
            let info = FilterInfo::Poly { degree: f.degree, gamma: f.gamma, bar: f.bar, cap_reached: f.cap_reached };
            let r = match method {
                Method::LanNr => cheb_lan_nr(&prob, &f, interval, cfg)?,
                Method::LanTr => cheb_lan_tr(&prob, &f, interval, cfg)?,
                Method::Subspace => cheb_si(&prob, &f, interval, est_count, cfg)?,
            };
            Ok((r, info))
        }
        FilterSpec::Rat(opts) => {
            let f = find_ratf(interval.0, interval.1, opts)?;
            let info = FilterInfo::Rat {
                poles: f.shifts().iter().map(|s| [s.re, s.im]).collect(),
                multiplicities: f.multiplicities.clone(),
                bar: f.bar,
            };
            let sys = ShiftedSystem::new(pencil.a, pencil.b.map(|(b, _)| b))?;
            let facs = factor_poles(&sys, &f)?;
            let solvers: Vec<&dyn ComplexSolver<T>> = facs.iter().map(|x| x as _).collect();
            let prob = Problem { b_solve: None, ..prob };
            let r = match method {
                Method::LanNr => rat_lan_nr(&prob, &f, &solvers, interval, cfg)?,
                Method::LanTr => rat_lan_tr(&prob, &f, &solvers, interval, cfg)?,
                Method::Subspace => {
                    return Err(Error::InvalidArgument("subspace iteration needs a polynomial filter".into()))
                }
            };
            Ok((r, info))
        }
    }
}

/// Seam rule: an eigenvalue within `1e-10 * width` of an interior breakpoint
/// belongs to the slice below it. Returns whether slice `i` keeps `lambda`.
pub fn slice_owns(set: &SliceSet, i: usize, lambda: f64, width: f64) -> bool {
    let eps = 1e-10 * width;
    let (lo, hi) = set.slice(i);
    (i == 0 || lambda > lo + eps) && (i + 1 == set.len() || lambda <= hi + eps)
}

/// Drops the pairs each slice does not own and concatenates the rest in
/// ascending order. Counters are summed; `complete` holds if every slice
/// completed. `width` is the spectral width used by the seam rule.
pub fn merge_slices<T: Real>(set: &SliceSet, parts: Vec<EigenResults<T>>, width: f64) -> Result<EigenResults<T>> {
    if parts.len() != set.len() {
        return Err(Error::InvalidArgument(format!("{} results for {} slices", parts.len(), set.len())));
    }
    let mut out = EigenResults {
        eigenvalues: Vec::new(),
        eigenvectors: Vec::new(),
        residuals: Vec::new(),
        theta: Vec::new(),
        stats: Default::default(),
        complete: true,
    };
    for (i, p) in parts.into_iter().enumerate() {
        let s = &mut out.stats;
        s.niter += p.stats.niter;
        s.n_a_matvec += p.stats.n_a_matvec;
        s.n_b_matvec += p.stats.n_b_matvec;
        s.n_b_solve += p.stats.n_b_solve;
        s.n_shift_solve += p.stats.n_shift_solve;
        s.t_mv += p.stats.t_mv;
        s.t_orth += p.stats.t_orth;
        s.t_sv += p.stats.t_sv;
        s.t_total += p.stats.t_total;
        s.cycles += p.stats.cycles;
        out.complete &= p.complete;
        let keep = keep_mask(set, i, &p.eigenvalues, width);
        let it = p.eigenvalues.into_iter().zip(p.eigenvectors).zip(p.residuals).zip(p.theta).zip(keep);
        for ((((l, v), r), t), k) in it {
            if k {
                out.eigenvalues.push(l);
                out.eigenvectors.push(v);
                out.residuals.push(r);
                out.theta.push(t);
            }
        }
    }
    Ok(out)
}

/// `slice_owns` applied to every eigenvalue of slice `i`.
pub fn keep_mask<T: Real>(set: &SliceSet, i: usize, eigenvalues: &[T], width: f64) -> Vec<bool> {
    eigenvalues.iter().map(|&l| slice_owns(set, i, to_f64(l), width)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{QuadRule, RatKind};
    use crate::operators::factor_spd;

    fn three_slices() -> SliceSet {
        SliceSet { breakpoints: vec![0.0, 1.0, 2.0, 3.0], counts: vec![1.0; 3] }
    }

    #[test]
    fn seam_goes_to_the_lower_slice() {
        let s = three_slices();
        assert!(slice_owns(&s, 0, 1.0, 3.0));
        assert!(!slice_owns(&s, 1, 1.0, 3.0));
        assert!(slice_owns(&s, 0, 1.0 + 1e-10, 3.0));
        assert!(!slice_owns(&s, 0, 1.0 + 1e-9, 3.0));
        assert!(slice_owns(&s, 1, 1.0 + 1e-9, 3.0));
        // the outer ends keep whatever the drivers accepted
        assert!(slice_owns(&s, 0, -1e-9, 3.0));
        assert!(slice_owns(&s, 2, 3.0 + 1e-9, 3.0));
    }

    #[test]
    fn merge_drops_duplicates() {
        let s = three_slices();
        let part = |ls: &[f64]| EigenResults {
            eigenvalues: ls.to_vec(),
            eigenvectors: ls.iter().map(|&l| vec![l]).collect(),
            residuals: vec![0.0; ls.len()],
            theta: vec![1.0; ls.len()],
            stats: Default::default(),
            complete: true,
        };
        let m = merge_slices(&s, vec![part(&[0.5, 1.0]), part(&[1.0, 1.5, 2.0]), part(&[2.0, 2.5])], 3.0).unwrap();
        assert_eq!(m.eigenvalues, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!(merge_slices(&s, vec![part(&[])], 3.0).is_err());
    }

    #[test]
    fn solve_slice_on_a_diagonal() {
        let d: Vec<f64> = (1..=30).map(|i| i as f64 / 10.0).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let bounds = SpectralBounds::new(0.0, 3.1).unwrap();
        let rat = RatOptions { p: 2, repeats: vec![1], rule: QuadRule::GaussLegendre, kind: RatKind::Cauchy, ..Default::default() };
        for (spec, method) in [
            (FilterSpec::Poly(PolyOptions::default()), Method::LanNr),
            (FilterSpec::Poly(PolyOptions::default()), Method::Subspace),
            (FilterSpec::Rat(rat.clone()), Method::LanTr),
        ] {
            let (r, _) = solve_slice(Pencil::standard(&a), &bounds, (1.05, 1.45), &spec, method, 4, None).unwrap();
            assert_eq!(r.len(), 4);
            for (l, want) in r.eigenvalues.iter().zip([1.1, 1.2, 1.3, 1.4]) {
                assert!((l - want).abs() < 1e-10);
            }
        }
        assert!(solve_slice(Pencil::standard(&a), &bounds, (1.05, 1.45), &FilterSpec::Rat(rat), Method::Subspace, 4, None)
            .is_err());

        // the pencil (2A, 2I) has the same eigenvalues
        let a2 = CsrMatrix::from_diagonal(&d.iter().map(|x| 2.0 * x).collect::<Vec<_>>());
        let b = CsrMatrix::from_diagonal(&[2.0; 30]);
        let g = factor_spd(&b).unwrap();
        let (r, info) = solve_slice(
            Pencil::generalized(&a2, &b, &g),
            &bounds,
            (1.05, 1.45),
            &FilterSpec::Poly(PolyOptions::default()),
            Method::LanTr,
            4,
            None,
        )
        .unwrap();
        assert_eq!(r.len(), 4);
        assert!(matches!(info, FilterInfo::Poly { .. }));
    }
}
