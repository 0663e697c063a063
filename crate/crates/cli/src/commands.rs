use std::io::{self, BufWriter, Write};

use serde::Serialize;
use sliceeig::dos::dos_count;
use sliceeig::filter::{find_pol, find_ratf, PolynomialFilter, RationalFilter};
use sliceeig::krylov::SpectralBounds;
use sliceeig::matrix::{gen_laplacian, write_matrix_market, write_matrix_market_to};
use sliceeig::pipeline::{FilterInfo, FilterSpec};
use sliceeig::slicer::slice_spectrum;
use sliceeig::CsrF64;

use crate::args::{BoundsArgs, DosArgs, FilterDumpArgs, Format, GenArgs, Interval, SliceArgs};
use crate::error::{CliError, Result};
use crate::output::{num, out_dir, print_json, versioned, write_csv, write_json};
use crate::problem::{dos_config, grid_points, DosSummary, Loaded};

#[derive(Serialize)]
struct GenReport<'a> {
    dims: &'a [usize],
    n: usize,
    nnz: usize,
    path: String,
}

pub fn gen(args: &GenArgs) -> Result<()> {
    let a: CsrF64 = gen_laplacian(&args.dims.0)?;
    match &args.out {
        Some(path) => {
            write_matrix_market(&a, path)?;
            let r = GenReport { dims: &args.dims.0, n: a.n(), nnz: a.nnz(), path: path.display().to_string() };
            print_json(&versioned("gen", r))
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_matrix_market_to(&a, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BoundsReport {
    n: usize,
    generalized: bool,
    lmin: f64,
    lmax: f64,
}

pub fn bounds(args: &BoundsArgs) -> Result<()> {
    let p = Loaded::from_args(&args.input)?;
    let b = p.bounds()?;
    let r = BoundsReport { n: p.n(), generalized: p.b.is_some(), lmin: b.lmin, lmax: b.lmax };
    if let Some(dir) = out_dir(&args.output.out)? {
        write_json(&dir.join("bounds.json"), &versioned("bounds", &r))?;
    }
    match args.output.format {
        Format::Json => print_json(&versioned("bounds", &r)),
        Format::Csv => write_csv(None, &["lmin", "lmax"], [vec![num(b.lmin), num(b.lmax)]]),
    }
}

#[derive(Serialize)]
struct DosReport {
    n: usize,
    lmin: f64,
    lmax: f64,
    dos: DosSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval_count: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<Curve>,
}

#[derive(Serialize)]
struct Curve {
    t: Vec<f64>,
    phi: Vec<f64>,
}

pub fn dos(args: &DosArgs) -> Result<()> {
    let p = Loaded::from_args(&args.input)?;
    let b = p.bounds()?;
    let cfg = dos_config(&args.dos, grid_points(&args.dos, &b, args.interval, 1), p.seed);
    let curve = p.dos(&b, &cfg)?;
    let count = args.interval.map(|iv| dos_count(&curve, iv.lo, iv.hi)).transpose()?;
    let rows = || curve.xdos.iter().zip(&curve.ydos).map(|(&t, &y)| vec![num(t), num(y)]);
    let dir = out_dir(&args.output.out)?;
    let mut r = DosReport {
        n: p.n(),
        lmin: b.lmin,
        lmax: b.lmax,
        dos: DosSummary::new(&cfg, &curve),
        interval: args.interval,
        interval_count: count,
        curve: None,
    };
    if let Some(dir) = dir {
        write_csv(Some(&dir.join("dos.csv")), &["t", "phi"], rows())?;
        write_json(&dir.join("dos.json"), &versioned("dos", &r))?;
    }
    match args.output.format {
        Format::Csv => write_csv(None, &["t", "phi"], rows()),
        Format::Json => {
            if dir.is_none() {
                r.curve = Some(Curve { t: curve.xdos.clone(), phi: curve.ydos.clone() });
            }
            print_json(&versioned("dos", &r))
        }
    }
}

#[derive(Serialize)]
pub struct SliceRow {
    pub lo: f64,
    pub hi: f64,
    pub est_count: f64,
}

#[derive(Serialize)]
struct SliceReport {
    n: usize,
    lmin: f64,
    lmax: f64,
    interval: Interval,
    dos: DosSummary,
    slices: Vec<SliceRow>,
}

pub fn slice(args: &SliceArgs) -> Result<()> {
    if args.slices == 0 {
        return Err(CliError::Usage("--slices must be at least 1".into()));
    }
    let p = Loaded::from_args(&args.input)?;
    let b = p.bounds()?;
    let cfg = dos_config(&args.dos, grid_points(&args.dos, &b, Some(args.interval), args.slices), p.seed);
    let curve = p.dos(&b, &cfg)?;
    let set = slice_spectrum(&curve, args.interval.lo, args.interval.hi, args.slices)?;
    let slices: Vec<SliceRow> =
        set.iter().zip(&set.counts).map(|((lo, hi), &c)| SliceRow { lo, hi, est_count: c }).collect();
    let header = ["lo", "hi", "est_count"];
    let r = SliceReport { n: p.n(), lmin: b.lmin, lmax: b.lmax, interval: args.interval, dos: DosSummary::new(&cfg, &curve), slices };
    let rows = || r.slices.iter().map(|s| vec![num(s.lo), num(s.hi), num(s.est_count)]).collect::<Vec<_>>();
    if let Some(dir) = out_dir(&args.output.out)? {
        write_json(&dir.join("slices.json"), &versioned("slice", &r))?;
        write_csv(Some(&dir.join("slices.csv")), &header, rows())?;
    }
    match args.output.format {
        Format::Json => print_json(&versioned("slice", &r)),
        Format::Csv => write_csv(None, &header, rows()),
    }
}

enum Built {
    Poly(PolynomialFilter),
    Rat(RationalFilter),
}

impl Built {
    fn eval(&self, lambda: f64) -> f64 {
        match self {
            Built::Poly(f) => f.eval_lambda(lambda),
            Built::Rat(f) => f.eval_lambda(lambda),
        }
    }
}

#[derive(Serialize)]
struct FilterReport {
    interval: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<SpectralBounds>,
    filter: FilterInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
    samples: Curve,
}

pub fn filter_dump(args: &FilterDumpArgs) -> Result<()> {
    let iv = args.interval;
    let from_matrix = args.input.matrix.is_some() || args.input.dims.is_some();
    let bounds = match (args.bounds, from_matrix) {
        (Some(b), false) => Some(SpectralBounds::new(b.lo, b.hi)?),
        (None, true) => Some(Loaded::from_args(&args.input)?.bounds()?),
        (Some(_), true) => return Err(CliError::Usage("give --bounds or a matrix, not both".into())),
        (None, false) => None,
    };
    let (built, info, coefficients) = match args.filter.spec() {
        FilterSpec::Poly(opts) => {
            let b = bounds.ok_or_else(|| CliError::Usage("a polynomial filter needs --bounds or a matrix".into()))?;
            let f = find_pol(iv.lo, iv.hi, &b, &opts)?;
            let info = FilterInfo::Poly { degree: f.degree, gamma: f.gamma, bar: f.bar, cap_reached: f.cap_reached };
            let c: Vec<f64> = f.coeffs.iter().map(|c| c / f.norm).collect();
            (Built::Poly(f), info, Some(c))
        }
        FilterSpec::Rat(opts) => {
            let f = find_ratf(iv.lo, iv.hi, &opts)?;
            let info = FilterInfo::Rat {
                poles: f.shifts().iter().map(|s| [s.re, s.im]).collect(),
                multiplicities: f.multiplicities.clone(),
                bar: f.bar,
            };
            (Built::Rat(f), info, None)
        }
    };
    let range = match (args.range, bounds) {
        (Some(r), _) => r.pair(),
        (None, Some(b)) => (b.lmin, b.lmax),
        (None, None) => {
            let (c, r) = (0.5 * (iv.lo + iv.hi), 0.5 * (iv.hi - iv.lo));
            (c - 3.0 * r, c + 3.0 * r)
        }
    };
    let ns = args.samples.max(2);
    let t: Vec<f64> = (0..ns).map(|i| range.0 + (range.1 - range.0) * i as f64 / (ns - 1) as f64).collect();
    let phi: Vec<f64> = t.iter().map(|&x| built.eval(x)).collect();
    let rows = || t.iter().zip(&phi).map(|(&x, &y)| vec![num(x), num(y)]).collect::<Vec<_>>();
    let header = ["lambda", "rho"];
    let dir = out_dir(&args.output.out)?;
    if let Some(dir) = dir {
        write_csv(Some(&dir.join("filter.csv")), &header, rows())?;
    }
    let r = FilterReport { interval: iv, bounds, filter: info, coefficients, samples: Curve { t: t.clone(), phi: phi.clone() } };
    if let Some(dir) = dir {
        write_json(&dir.join("filter.json"), &versioned("filter-dump", &r))?;
    }
    match args.output.format {
        Format::Json => print_json(&versioned("filter-dump", &r)),
        Format::Csv => write_csv(None, &header, rows()),
    }
}
