use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sliceeig::dos::DosMethod;
use sliceeig::filter::{Damping, PolyOptions, QuadRule, RatKind, RatOptions, RatWeight};
use sliceeig::pipeline::{FilterSpec, Method};

#[derive(Parser, Debug)]
#[command(name = "sliceeig", version, about = "Eigenpairs of sparse symmetric matrices and pencils inside an interval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the finite-difference Laplacian of a 1-D, 2-D or 3-D grid in MatrixMarket format.
    Gen(GenArgs),
    /// Estimate the extreme eigenvalues.
    Bounds(BoundsArgs),
    /// Estimate the spectral density.
    Dos(DosArgs),
    /// Split an interval into slices holding about the same number of eigenvalues.
    Slice(SliceArgs),
    /// Build the filter for an interval and sample it.
    FilterDump(FilterDumpArgs),
    /// Compute all eigenpairs inside an interval.
    Solve(SolveArgs),
}

/// Comma-separated grid dimensions, e.g. `60,60`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Dims(pub Vec<usize>);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let d = s
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad dimension {x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if d.is_empty() || d.len() > 3 || d.contains(&0) {
            return Err(format!("expected 1 to 3 positive dimensions, got {s:?}"));
        }
        Ok(Dims(d))
    }
}

/// `LO,HI` with `LO < HI`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').collect();
        let [lo, hi] = parts.as_slice() else {
            return Err(format!("expected LO,HI, got {s:?}"));
        };
        let lo: f64 = lo.trim().parse().map_err(|e| format!("bad number {lo:?}: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("bad number {hi:?}: {e}"))?;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("need finite LO < HI, got {s:?}"));
        }
        Ok(Interval { lo, hi })
    }
}

impl Interval {
    pub fn pair(self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Comma-separated list of pole multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Repeats(pub Vec<usize>);

impl FromStr for Repeats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad multiplicity {x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Repeats)
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub dims: Dims,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Where the matrix (and optionally `B`) comes from. Exactly one of
/// `--matrix` and `--dims` is required.
#[derive(Args, Clone, Debug, Serialize)]
pub struct InputArgs {
    /// MatrixMarket file holding A.
    #[arg(long, conflicts_with = "dims")]
    pub matrix: Option<PathBuf>,
    /// Generate the grid Laplacian with these dimensions instead of reading A.
    #[arg(long)]
    pub dims: Option<Dims>,
    /// MatrixMarket file holding an SPD B for the pencil (A, B).
    #[arg(long)]
    pub bmatrix: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DosKind {
    Kpm,
    Lanczos,
}

impl From<DosKind> for DosMethod {
    fn from(k: DosKind) -> Self {
        match k {
            DosKind::Kpm => DosMethod::Kpm,
            DosKind::Lanczos => DosMethod::Lanczos,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct DosOpts {
    /// Density estimator.
    #[arg(long, value_enum, default_value_t = DosKind::Kpm)]
    pub method: DosKind,
    /// KPM degree or number of Lanczos steps.
    #[arg(long, default_value_t = 60)]
    pub degree: usize,
    /// Number of random probe vectors.
    #[arg(long, default_value_t = 40)]
    pub nvec: usize,
    /// Grid points of the sampled curve. Defaults to 300, raised for narrow intervals.
    #[arg(long)]
    pub npts: Option<usize>,
    /// Gaussian width of the Lanczos estimator.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct OutputArgs {
    /// Directory for result files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of what goes to standard output.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Poly,
    Rat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingKind {
    Sigma,
    Jackson,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RatFit {
    Ls,
    Cauchy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Gauss,
    Midpoint,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct FilterOpts {
    #[arg(long, value_enum, default_value_t = FilterKind::Poly)]
    pub filter: FilterKind,
    /// Damping of the polynomial filter.
    #[arg(long, value_enum, default_value_t = DampingKind::Sigma)]
    pub damping: DampingKind,
    /// Endpoint threshold of the polynomial filter.
    #[arg(long, default_value_t = 0.8)]
    pub tau: f64,
    #[arg(long, default_value_t = 3000)]
    pub max_deg: usize,
    /// Poles of the rational filter in the upper half plane.
    #[arg(long, default_value_t = 3)]
    pub poles: usize,
    /// Pole multiplicity, one value for all poles or one per pole.
    #[arg(long, default_value = "1")]
    pub repeats: Repeats,
    #[arg(long, value_enum, default_value_t = RatFit::Ls)]
    pub fit: RatFit,
    #[arg(long, value_enum, default_value_t = Quadrature::Gauss)]
    pub quadrature: Quadrature,
}

impl FilterOpts {
    pub fn spec(&self) -> FilterSpec {
        match self.filter {
            FilterKind::Poly => FilterSpec::Poly(PolyOptions {
                tau: self.tau,
                max_deg: self.max_deg,
                damping: match self.damping {
                    DampingKind::Sigma => Damping::Sigma,
                    DampingKind::Jackson => Damping::Jackson,
                    DampingKind::None => Damping::None,
                },
            }),
            FilterKind::Rat => FilterSpec::Rat(RatOptions {
                p: self.poles,
                repeats: self.repeats.0.clone(),
                rule: match self.quadrature {
                    Quadrature::Gauss => QuadRule::GaussLegendre,
                    Quadrature::Midpoint => QuadRule::Midpoint,
                },
                kind: match self.fit {
                    RatFit::Ls => RatKind::Ls,
                    RatFit::Cauchy => RatKind::Cauchy,
                },
                weight: RatWeight::default(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Non-restarted Lanczos.
    LanNr,
    /// Thick-restart Lanczos.
    LanTr,
    /// Subspace iteration, polynomial filter only.
    Subspace,
}

impl From<SolverKind> for Method {
    fn from(k: SolverKind) -> Self {
        match k {
            SolverKind::LanNr => Method::LanNr,
            SolverKind::LanTr => Method::LanTr,
            SolverKind::Subspace => Method::Subspace,
        }
    }
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DosArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub dos: DosOpts,
    /// Also report the estimated count inside this interval.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<Interval>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SliceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub dos: DosOpts,
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Interval,
    #[arg(long, default_value_t = 1)]
    pub slices: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FilterDumpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Spectral bounds to use instead of estimating them from a matrix.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<Interval>,
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Interval,
    #[command(flatten)]
    pub filter: FilterOpts,
    /// Number of samples.
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Sampling range; defaults to the spectral bounds when known.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<Interval>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Interval,
    #[arg(long, default_value_t = 1)]
    pub slices: usize,
    #[command(flatten)]
    pub dos: DosOpts,
    #[command(flatten)]
    pub filter: FilterOpts,
    #[arg(long, value_enum, default_value_t = SolverKind::LanNr)]
    pub solver: SolverKind,
    /// Residual tolerance, relative to max(1, |lambda|).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Iteration cap per slice; scaled by the slice estimate when absent.
    #[arg(long)]
    pub max_its: Option<usize>,
    /// Slices solved at the same time. SLICEEIG_THREADS caps the pool.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Skip writing eigenvectors.
    #[arg(long)]
    pub no_vectors: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}
