use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sliceeig::krylov::SpectralBounds;
use sliceeig::pipeline::{keep_mask, merge_slices, solve_slice, FilterInfo};
use sliceeig::slicer::{slice_spectrum, SliceSet};
use sliceeig::solver::SolveStats;
use sliceeig::{EigenResultsF64, SolverConfig};

use crate::args::{Format, SolveArgs};
use crate::error::{CliError, Result};
use crate::output::{num, out_dir, print_json, versioned, write_csv, write_json, write_vectors, SCHEMA};
use crate::problem::{dos_config, grid_points, DosSummary, Loaded};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceStatus {
    Converged,
    Incomplete,
    Failed,
}

#[derive(Serialize)]
pub struct SliceReport {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub est_count: f64,
    pub status: SliceStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Eigenvalues this slice owns after the seam rule.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterInfo>,
    pub stats: SolveStats,
    pub t_wall: f64,
}

#[derive(Serialize)]
struct Timings {
    t_load: f64,
    t_bounds: f64,
    t_dos: f64,
    t_solve: f64,
    t_total: f64,
}

#[derive(Serialize)]
struct RunReport<'a> {
    manifest: &'a SolveArgs,
    n: usize,
    generalized: bool,
    bounds: SpectralBounds,
    dos: DosSummary,
    slices: Vec<SliceReport>,
    totals: SolveStats,
    complete: bool,
    count: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    timings: Timings,
}

#[derive(Serialize)]
struct VectorSidecar<'a> {
    schema: u32,
    file: &'a str,
    dtype: &'a str,
    n: usize,
    count: usize,
    /// Vector `j` occupies entries `j n .. (j + 1) n`.
    layout: &'a str,
    eigenvalues: &'a [f64],
}

fn empty_results() -> EigenResultsF64 {
    EigenResultsF64 {
        eigenvalues: Vec::new(),
        eigenvectors: Vec::new(),
        residuals: Vec::new(),
        theta: Vec::new(),
        stats: SolveStats::default(),
        complete: false,
    }
}

fn pool_size(jobs: usize) -> usize {
    let cap = std::env::var("SLICEEIG_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&c| c > 0);
    let j = jobs.max(1);
    cap.map_or(j, |c| j.min(c))
}

/// Runs the whole pipeline. Returns whether every slice converged.
pub fn solve(args: &SolveArgs) -> Result<bool> {
    if args.slices == 0 {
        return Err(CliError::Usage("--slices must be at least 1".into()));
    }
    if !(args.tol > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let t0 = Instant::now();
    let p = Loaded::from_args(&args.input)?;
    let t_load = t0.elapsed().as_secs_f64();

    let t = Instant::now();
    let bounds = p.bounds()?;
    let t_bounds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let dcfg = dos_config(&args.dos, grid_points(&args.dos, &bounds, Some(args.interval), args.slices), p.seed);
    let curve = p.dos(&bounds, &dcfg)?;
    let set = slice_spectrum(&curve, args.interval.lo, args.interval.hi, args.slices)?;
    let t_dos = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let spec = args.filter.spec();
    let method = args.solver.into();
    let pencil = p.pencil();
    let run = |i: usize| {
        let (lo, hi) = set.slice(i);
        let est = set.counts[i].max(0.0).ceil() as usize;
        let mut cfg = SolverConfig::for_estimate(est);
        cfg.res_tol = args.tol;
        cfg.seed = p.seed;
        if let Some(m) = args.max_its {
            cfg.max_its = m;
        }
        let start = Instant::now();
        let r = solve_slice(pencil, &bounds, (lo, hi), &spec, method, est, Some(&cfg));
        (r, start.elapsed().as_secs_f64())
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(pool_size(args.jobs)).build()?;
    let outcomes: Vec<_> = pool.install(|| (0..set.len()).into_par_iter().map(run).collect());
    let t_solve = t.elapsed().as_secs_f64();

    let width = bounds.lmax - bounds.lmin;
    let dir = out_dir(&args.output.out)?;
    let mut slices = Vec::with_capacity(set.len());
    let mut parts = Vec::with_capacity(set.len());
    for (i, (outcome, t_wall)) in outcomes.into_iter().enumerate() {
        let report = slice_report(&set, i, &outcome, t_wall, width);
        if let Some(dir) = dir {
            let doc = versioned("solve-slice", &report);
            write_json(&dir.join(format!("slice_{i:03}.json")), &doc)?;
        }
        slices.push(report);
        parts.push(outcome.map(|(r, _)| r).unwrap_or_else(|_| empty_results()));
    }
    let merged = merge_slices(&set, parts, width)?;
    let complete = slices.iter().all(|s| s.status == SliceStatus::Converged);

    let report = RunReport {
        manifest: args,
        n: p.n(),
        generalized: p.b.is_some(),
        bounds,
        dos: DosSummary::new(&dcfg, &curve),
        totals: merged.stats,
        complete,
        count: merged.len(),
        eigenvalues: merged.eigenvalues.clone(),
        residuals: merged.residuals.clone(),
        slices,
        timings: Timings { t_load, t_bounds, t_dos, t_solve, t_total: t0.elapsed().as_secs_f64() },
    };
    let header = ["index", "eigenvalue", "residual"];
    let rows = || {
        merged.eigenvalues.iter().zip(&merged.residuals).enumerate().map(|(i, (&l, &r))| vec![i.to_string(), num(l), num(r)])
    };
    if let Some(dir) = dir {
        write_json(&dir.join("report.json"), &versioned("solve", &report))?;
        write_csv(Some(&dir.join("eigenvalues.csv")), &header, rows())?;
        if !args.no_vectors {
            write_eigenvectors(dir, p.n(), &merged)?;
        }
    }
    match args.output.format {
        Format::Json => print_json(&versioned("solve", &report))?,
        Format::Csv => write_csv(None, &header, rows())?,
    }
    Ok(complete)
}

fn slice_report(
    set: &SliceSet,
    i: usize,
    outcome: &sliceeig::Result<(EigenResultsF64, FilterInfo)>,
    t_wall: f64,
    width: f64,
) -> SliceReport {
    let (lo, hi) = set.slice(i);
    let mut s = SliceReport {
        index: i,
        lo,
        hi,
        est_count: set.counts[i],
        status: SliceStatus::Failed,
        error: None,
        eigenvalues: Vec::new(),
        residuals: Vec::new(),
        filter: None,
        stats: SolveStats::default(),
        t_wall,
    };
    match outcome {
        Err(e) => s.error = Some(e.to_string()),
        Ok((r, info)) => {
            let keep = keep_mask(set, i, &r.eigenvalues, width);
            for ((&l, &res), k) in r.eigenvalues.iter().zip(&r.residuals).zip(keep) {
                if k {
                    s.eigenvalues.push(l);
                    s.residuals.push(res);
                }
            }
            s.status = if r.complete { SliceStatus::Converged } else { SliceStatus::Incomplete };
            s.filter = Some(info.clone());
            s.stats = r.stats;
        }
    }
    s
}

fn write_eigenvectors(dir: &Path, n: usize, r: &EigenResultsF64) -> Result<()> {
    let file = "eigenvectors.bin";
    write_vectors(&dir.join(file), &r.eigenvectors)?;
    let side = VectorSidecar {
        schema: SCHEMA,
        file,
        dtype: "float64-le",
        n,
        count: r.len(),
        layout: "vector-major",
        eigenvalues: &r.eigenvalues,
    };
    write_json(&dir.join("eigenvectors.json"), &side)
}
