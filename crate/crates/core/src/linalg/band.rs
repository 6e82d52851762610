use crate::error::{Error, Result};
use num_traits::{Float, Zero};

use crate::Real;

use super::Scalar;

/// Square banded matrix with `kl` sub-diagonals and `ku` super-diagonals,
/// stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix<S> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<S>,
}

impl<S: Scalar> BandMatrix<S> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![S::zero(); n * (kl + ku + 1)],
        }
    }

    /// Builds the matrix from `(row, col, value)` entries, summing duplicates.
    /// The bandwidths are the smallest ones covering every entry.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, S)]) -> Self {
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}x{n}");
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let mut m = Self::zeros(n, kl, ku);
        for &(i, j, v) in entries {
            m.add(i, j, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && i + self.ku >= j
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            S::zero()
        }
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.slot(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: S) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.slot(i, j);
        self.data[k] += v;
    }

    /// Column range of the stored band in row `i`.
    pub fn row_span(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        for i in 0..self.n {
            let mut s = S::zero();
            for j in self.row_span(i) {
                s += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = s;
        }
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Returns `A + s I`.
    pub fn shifted(&self, s: S) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.add(i, i, s);
        }
        m
    }

    /// Applies `f` to every stored entry.
    pub fn map<R: Scalar>(&self, f: impl Fn(S) -> R) -> BandMatrix<R> {
        BandMatrix {
            n: self.n,
            kl: self.kl,
            ku: self.ku,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut out = vec![vec![S::zero(); self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for j in self.row_span(i) {
                row[j] = self.get(i, j);
            }
        }
        out
    }

    pub fn factor(&self) -> Result<BandLu<S>> {
        BandLu::new(self)
    }
}

/// LU factorization with partial pivoting of a [`BandMatrix`].
///
/// Uses column-major band storage with `kl` extra super-diagonals to hold
/// the fill created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu<S> {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> BandLu<S> {
    pub fn new(a: &BandMatrix<S>) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        let ld = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            ld,
            ab: vec![S::zero(); ld * n],
            piv: vec![0; n],
        };
        for i in 0..n {
            for j in a.row_span(i) {
                let k = lu.idx(i, j);
                lu.ab[k] = a.get(i, j);
            }
        }
        lu.decompose()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + (self.kl + self.ku + i - j)
    }

    fn decompose(&mut self) -> Result<()> {
        let n = self.n;
        let scale = self
            .ab
            .iter()
            .fold(S::Re::zero(), |m, v| m.max(v.modulus()));
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.idx(k, k)].modulus();
            for i in k + 1..=last_row {
                let m = self.ab[self.idx(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            let tiny = scale * S::Re::epsilon() * S::Re::of(1e-3);
            if !(best > tiny) {
                return Err(Error::SingularSystem {
                    row: k,
                    pivot: best.to_f64_lossy(),
                });
            }
            self.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.ab[ik] / pivot;
                self.ab[ik] = l;
                if l == S::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = self.ab[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.ab[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [S]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                b[i] -= self.ab[self.idx(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s -= self.ab[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.ab[self.idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sample(n: usize, kl: usize, ku: usize) -> BandMatrix<f64> {
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in a.row_span(i) {
                let v = ((i * 7 + j * 3) as f64 * 0.71).sin();
                a.set(i, j, if i == j { 0.2 + 0.1 * v } else { v });
            }
        }
        a
    }

    #[test]
    fn pivoting_solve_recovers_vector() {
        for &(kl, ku) in &[(0, 0), (1, 1), (3, 1), (1, 4), (6, 3)] {
            let a = sample(23, kl, ku);
            let x: Vec<f64> = (0..23).map(|i| (i as f64 * 0.37).cos()).collect();
            let b = a.mul_vec(&x);
            let sol = a.factor().unwrap().solve(&b);
            for (s, e) in sol.iter().zip(&x) {
                assert!((s - e).abs() < 1e-9, "kl={kl} ku={ku}: {s} vs {e}");
            }
        }
    }

    #[test]
    fn zero_leading_entry_needs_pivot() {
        let a = BandMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let x = a.factor().unwrap().solve(&[2.0, 3.0]);
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_detected() {
        let a = BandMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(a.factor(), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn complex_solve() {
        let n = 9;
        let mut a = BandMatrix::<Complex64>::zeros(n, 2, 1);
        for i in 0..n {
            for j in a.row_span(i) {
                a.set(
                    i,
                    j,
                    Complex64::new((i + 2 * j) as f64 * 0.3 - 1.0, (i as f64 - j as f64) * 0.7),
                );
            }
        }
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(i as f64, 1.0 - i as f64))
            .collect();
        let b = a.mul_vec(&x);
        let s = a.factor().unwrap().solve(&b);
        for (u, v) in s.iter().zip(&x) {
            assert!((u - v).norm() < 1e-10);
        }
    }
}
