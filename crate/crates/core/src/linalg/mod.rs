//! Banded and small dense linear algebra used by the front solver, the
//! time integrator and the numerical-range computations.

mod band;
mod dense;
mod hermitian;
mod scalar;
mod tridiag;

pub use band::{BandLu, BandMatrix};
pub use dense::{hermitian_top_dense, symmetric_eigen};
pub use hermitian::{HermBand, HermCholesky, TopEigen};
pub use scalar::Scalar;
pub use tridiag::{solve_tridiagonal, Tridiagonal};
