use serde::Serialize;
use sliceeig::dos::{dos, dos_generalized, BPencil, DosConfig, DosCurve};
use sliceeig::krylov::{lan_tr_bounds, InnerProduct, PlainOperator, SpectralBounds};
use sliceeig::matrix::{gen_laplacian, read_matrix_market};
use sliceeig::operators::{factor_spd, FnSolver, SpdFactor};
use sliceeig::pipeline::Pencil;
use sliceeig::solver::transform_with_cholesky;
use sliceeig::CsrF64;

use crate::args::{DosOpts, InputArgs, Interval};
use crate::error::{CliError, Result};

const BOUNDS_TOL: f64 = 1e-8;
const BOUNDS_RESTART: usize = 50;

/// `A`, and `B` with its factor for a pencil.
pub struct Loaded {
    pub a: CsrF64,
    pub b: Option<(CsrF64, SpdFactor<f64>)>,
    pub seed: u64,
}

impl Loaded {
    pub fn from_args(input: &InputArgs) -> Result<Self> {
        let a = match (&input.matrix, &input.dims) {
            (Some(path), None) => read_matrix_market(path)?,
            (None, Some(d)) => gen_laplacian(&d.0)?,
            _ => return Err(CliError::Usage("give exactly one of --matrix and --dims".into())),
        };
        let b = match &input.bmatrix {
            None => None,
            Some(path) => {
                let b: CsrF64 = read_matrix_market(path)?;
                if b.n() != a.n() {
                    return Err(CliError::Usage(format!("B has order {} but A has order {}", b.n(), a.n())));
                }
                let g = factor_spd(&b)?;
                Some((b, g))
            }
        };
        Ok(Self { a, b, seed: input.seed })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn pencil(&self) -> Pencil<'_, f64> {
        match &self.b {
            None => Pencil::standard(&self.a),
            Some((b, g)) => Pencil::generalized(&self.a, b, g),
        }
    }

    pub fn bounds(&self) -> Result<SpectralBounds> {
        let b = match &self.b {
            None => lan_tr_bounds(&PlainOperator(&self.a), &InnerProduct::Euclidean, BOUNDS_TOL, BOUNDS_RESTART, self.seed)?,
            Some((_, g)) => {
                let t = transform_with_cholesky(&self.a, g)?;
                lan_tr_bounds(&PlainOperator(&t), &InnerProduct::Euclidean, BOUNDS_TOL, BOUNDS_RESTART, self.seed)?
            }
        };
        Ok(b)
    }

    pub fn dos(&self, bounds: &SpectralBounds, cfg: &DosConfig) -> Result<DosCurve> {
        let c = match &self.b {
            None => dos(&self.a, bounds, cfg)?,
            Some((b, g)) => {
                let half = FnSolver::new(self.n(), |v: &[f64], w: &mut [f64]| g.solve_lt(v, w));
                dos_generalized(&self.a, &BPencil { b, b_solve: g, half_solve: &half }, bounds, cfg)?
            }
        };
        Ok(c)
    }
}

/// Grid size for a curve that must resolve `ns` slices of `interval`: the
/// default 300 points, raised so the interval gets about 40 points per slice.
pub fn grid_points(opts: &DosOpts, bounds: &SpectralBounds, interval: Option<Interval>, ns: usize) -> usize {
    if let Some(n) = opts.npts {
        return n;
    }
    let Some(iv) = interval else { return 300 };
    let width = bounds.lmax - bounds.lmin;
    let inside = (iv.hi.min(bounds.lmax) - iv.lo.max(bounds.lmin)).max(width * 1e-6);
    let want = (40.0 * (ns + 1) as f64 * width / inside).ceil() as usize;
    want.clamp(300, 200_000)
}

pub fn dos_config(opts: &DosOpts, npts: usize, seed: u64) -> DosConfig {
    DosConfig { method: opts.method.into(), m: opts.degree, n_vec: opts.nvec, npts, sigma: opts.sigma, seed }
}

#[derive(Serialize)]
pub struct DosSummary {
    pub method: sliceeig::dos::DosMethod,
    pub degree: usize,
    pub nvec: usize,
    pub npts: usize,
    pub nev_est: f64,
}

impl DosSummary {
    pub fn new(cfg: &DosConfig, curve: &DosCurve) -> Self {
        Self { method: cfg.method, degree: cfg.m, nvec: cfg.n_vec, npts: cfg.npts, nev_est: curve.nev_est }
    }
}
