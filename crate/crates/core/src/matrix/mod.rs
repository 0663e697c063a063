pub mod csr;
pub mod dense;
pub mod laplacian;
pub mod market;
pub mod tridiag;

pub use csr::CsrMatrix;
pub use dense::{dense_sym_eig, householder_tridiagonalize, jacobi_eig, DenseMat, DenseSym};
pub use laplacian::{gen_laplacian, laplacian_analytic_eigs};
pub use market::{parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to};
pub use tridiag::{sym_tridiag_eig, TriDiag};
