use crate::error::{Error, Result};
use crate::Real;

/// Tridiagonal matrix with `lower[i] = A[i][i-1]` (`lower[0]` unused),
/// `diag[i] = A[i][i]` and `upper[i] = A[i][i+1]` (`upper[n-1]` unused).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    pub fn solve_in_place(&self, rhs: &mut [T], scratch: &mut Vec<T>) -> Result<()> {
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, rhs, scratch)
    }
}

/// Thomas algorithm without pivoting; `rhs` is overwritten with the solution.
///
/// Intended for diagonally dominant systems (implicit diffusion steps).
pub fn solve_tridiagonal<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &mut [T],
    scratch: &mut Vec<T>,
) -> Result<()> {
    let n = rhs.len();
    if n == 0 {
        return Ok(());
    }
    scratch.clear();
    scratch.resize(n, T::zero());
    let mut beta = diag[0];
    if beta == T::zero() {
        return Err(Error::SingularSystem { row: 0, pivot: 0.0 });
    }
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        if beta == T::zero() || !beta.is_finite() {
            return Err(Error::SingularSystem {
                row: i,
                pivot: beta.to_f64_lossy(),
            });
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}
