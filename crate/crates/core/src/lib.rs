pub mod counters;
pub mod dos;
pub mod error;
pub mod filter;
pub mod krylov;
pub mod matrix;
pub mod operators;
pub mod pipeline;
pub mod scalar;
pub mod slicer;
pub mod solver;
pub mod vector;

pub use error::{Error, Result};
pub use scalar::Real;

pub use matrix::CsrMatrix;
pub use solver::{EigenResults, SolverConfig};

pub type CsrF64 = matrix::CsrMatrix<f64>;
pub type CsrF32 = matrix::CsrMatrix<f32>;
pub type EigenResultsF64 = solver::EigenResults<f64>;
pub type EigenResultsF32 = solver::EigenResults<f32>;
