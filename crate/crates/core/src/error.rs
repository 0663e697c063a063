use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("matrix is not symmetric: entry ({row},{col}) = {value} but its transpose holds {transpose}")]
    NotSymmetric {
        row: usize,
        col: usize,
        value: f64,
        transpose: f64,
    },

    #[error("MatrixMarket parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size guard exceeded: {what} = {value} > {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix not SPD: non-positive pivot {pivot} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("singular pivot at index {index} (|d| = {modulus})")]
    SingularPivot { index: usize, modulus: f64 },

    #[error("rank-deficient Gram matrix: basis term {term} of pole {pole} is linearly dependent on the others")]
    RankDeficient { pole: usize, term: usize },

    #[error("polynomial approximation did not reach tolerance {tol:e} by degree {max_deg} (achieved {achieved:e})")]
    ApproximationFailed {
        tol: f64,
        max_deg: usize,
        achieved: f64,
    },

    #[error("solver failure for pole {pole}: {source}")]
    PoleSolve {
        pole: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("subspace too small: {converged} converged pairs fill the block of {block}; increase the eigenvalue estimate")]
    SubspaceTooSmall { converged: usize, block: usize },

    #[error("{0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
