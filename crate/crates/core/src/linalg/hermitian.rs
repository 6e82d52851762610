use crate::error::{Error, Result};
use num_traits::{Float, One, Zero};

use crate::Real;

use super::{BandMatrix, Scalar};

/// Hermitian banded matrix with half-bandwidth `b`; only the lower triangle
/// is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HermBand<S> {
    n: usize,
    b: usize,
    data: Vec<S>,
}

/// Largest eigenvalue of a Hermitian matrix with an approximate eigenvector.
///
/// `upper` is a certified upper bound (the shifted matrix `upper I - H`
/// admits a Cholesky factorization) and `lower <= lambda` is the bisection
/// bracket's other end.
#[derive(Debug, Clone, PartialEq)]
pub struct TopEigen<S: Scalar> {
    pub lower: S::Re,
    pub upper: S::Re,
    pub vector: Vec<S>,
    /// Rayleigh quotient of `vector`.
    pub rayleigh: S::Re,
}

/// Cholesky factor `L` with `A = L L^H`.
#[derive(Debug, Clone)]
pub struct HermCholesky<S> {
    n: usize,
    b: usize,
    l: Vec<S>,
}

impl<S: Scalar> HermBand<S> {
    pub fn zeros(n: usize, b: usize) -> Self {
        Self {
            n,
            b,
            data: vec![S::zero(); n * (b + 1)],
        }
    }

    /// `(e^{i theta} M + e^{-i theta} M^H) / 2` for a complex band matrix `M`
    /// given the rotation `rot = e^{i theta}`.
    pub fn rotated_hermitian_part(m: &BandMatrix<S>, rot: S) -> Self {
        let n = m.dim();
        let b = m.lower_bandwidth().max(m.upper_bandwidth());
        let half = S::from_re(S::Re::of(0.5));
        let mut h = Self::zeros(n, b);
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                let v = (rot * m.get(i, j) + (rot * m.get(j, i)).conj()) * half;
                h.set(i, j, v);
            }
        }
        h
    }

    /// `A^H A`; its half-bandwidth is `kl + ku`.
    pub fn gram(a: &BandMatrix<S>) -> Self {
        let n = a.dim();
        let (kl, ku) = (a.lower_bandwidth(), a.upper_bandwidth());
        let b = kl + ku;
        let mut h = Self::zeros(n, b);
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                // rows k with both A[k][i] and A[k][j] in band
                let lo = i.saturating_sub(ku);
                let hi = (j + kl).min(n - 1);
                let mut s = S::zero();
                for k in lo..=hi {
                    s += a.get(k, i).conj() * a.get(k, j);
                }
                h.set(i, j, s);
            }
        }
        h
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.b
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (self.b + 1) + (j + self.b - i)
    }

    /// Stores `H[i][j]` for `j <= i`; the upper triangle follows by symmetry.
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        assert!(
            j <= i && i - j <= self.b && i < self.n,
            "({i}, {j}) outside lower band"
        );
        let k = self.slot(i, j);
        self.data[k] = if i == j { S::from_re(v.re()) } else { v };
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        if i >= j {
            if i - j <= self.b {
                self.data[self.slot(i, j)]
            } else {
                S::zero()
            }
        } else {
            self.get(j, i).conj()
        }
    }

    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        for yi in y.iter_mut() {
            *yi = S::zero();
        }
        for i in 0..self.n {
            let row = i * (self.b + 1);
            for j in i.saturating_sub(self.b)..i {
                let v = self.data[row + j + self.b - i];
                y[i] += v * x[j];
                y[j] += v.conj() * x[i];
            }
            y[i] += self.data[row + self.b] * x[i];
        }
    }

    pub fn quadratic_form(&self, x: &[S]) -> S::Re {
        let mut y = vec![S::zero(); self.n];
        self.matvec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * *b).re()).sum()
    }

    pub fn max_diagonal(&self) -> S::Re {
        (0..self.n)
            .map(|i| self.data[self.slot(i, i)].re())
            .fold(S::Re::neg_infinity(), S::Re::max)
    }

    pub fn min_diagonal(&self) -> S::Re {
        (0..self.n)
            .map(|i| self.data[self.slot(i, i)].re())
            .fold(S::Re::infinity(), S::Re::min)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (S::Re, S::Re) {
        let mut radius = vec![S::Re::zero(); self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.b)..i {
                let m = self.data[self.slot(i, j)].modulus();
                radius[i] += m;
                radius[j] += m;
            }
        }
        let mut lo = S::Re::infinity();
        let mut hi = S::Re::neg_infinity();
        for (i, r) in radius.iter().enumerate() {
            let d = self.data[self.slot(i, i)].re();
            lo = lo.min(d - *r);
            hi = hi.max(d + *r);
        }
        (lo, hi)
    }

    /// Cholesky factorization of `sign * H + shift I`; `None` when that
    /// matrix is not positive definite.
    pub fn cholesky_shifted(&self, sign: S::Re, shift: S::Re) -> Option<HermCholesky<S>> {
        let mut l = Vec::new();
        if self.cholesky_into(sign, shift, &mut l) {
            Some(HermCholesky {
                n: self.n,
                b: self.b,
                l,
            })
        } else {
            None
        }
    }

    pub fn cholesky(&self) -> Option<HermCholesky<S>> {
        self.cholesky_shifted(S::Re::one(), S::Re::zero())
    }

    fn cholesky_into(&self, sign: S::Re, shift: S::Re, l: &mut Vec<S>) -> bool {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        l.clear();
        l.resize(n * w, S::zero());
        let sgn = S::from_re(sign);
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                let mut s = self.data[i * w + j + b - i] * sgn;
                if i == j {
                    s += S::from_re(shift);
                }
                let k0 = j0.max(j.saturating_sub(b));
                for k in k0..j {
                    s -= l[i * w + k + b - i] * l[j * w + k + b - j].conj();
                }
                if i == j {
                    let d = s.re();
                    if !(d > S::Re::zero()) {
                        return false;
                    }
                    l[i * w + b] = S::from_re(d.sqrt());
                } else {
                    l[i * w + j + b - i] = s / l[j * w + b];
                }
            }
        }
        true
    }

    fn is_positive_definite(&self, sign: S::Re, shift: S::Re, work: &mut Vec<S>) -> bool {
        self.cholesky_into(sign, shift, work)
    }

    /// Largest eigenvalue by bisection on the definiteness of `s I - H`,
    /// followed by inverse iteration at the certified upper end.
    ///
    /// Bisection stops when the bracket is below `tol * max(1, |lambda|)`.
    pub fn top_eigen(&self, tol: S::Re) -> Result<TopEigen<S>> {
        let one = S::Re::one();
        let (_, g_hi) = self.gershgorin();
        let mut lo = self.max_diagonal();
        let mut work = Vec::new();
        let bump = |x: S::Re| x + (x.abs().max(one)) * S::Re::epsilon() * S::Re::of(64.0);
        let mut hi = bump(g_hi);
        if !self.is_positive_definite(-one, hi, &mut work) {
            hi = bump(hi + (hi.abs().max(one)) * S::Re::of(1e-6));
            if !self.is_positive_definite(-one, hi, &mut work) {
                return Err(Error::Eigensolver { theta: f64::NAN });
            }
        }
        if lo > hi {
            lo = hi;
        }
        let floor = S::Re::epsilon() * S::Re::of(16.0);
        for _ in 0..200 {
            let scale = lo.abs().max(hi.abs()).max(one);
            if hi - lo <= tol.max(floor) * scale {
                break;
            }
            let mid = lo + (hi - lo) * S::Re::of(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.is_positive_definite(-one, mid, &mut work) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let chol = self
            .cholesky_shifted(-one, hi)
            .ok_or(Error::Eigensolver { theta: f64::NAN })?;
        let n = self.n;
        let mut v: Vec<S> = (0..n)
            .map(|i| S::from_re(one + S::Re::of(0.5) * S::Re::of(((i * 37 % 17) as f64) / 17.0)))
            .collect();
        normalize(&mut v);
        let mut rayleigh = self.quadratic_form(&v);
        for _ in 0..50 {
            chol.solve_in_place(&mut v);
            if v.iter().any(|x| !x.finite()) {
                return Err(Error::Eigensolver { theta: f64::NAN });
            }
            normalize(&mut v);
            let next = self.quadratic_form(&v);
            let done =
                (next - rayleigh).abs() <= S::Re::epsilon() * S::Re::of(8.0) * next.abs().max(one);
            rayleigh = next;
            if done {
                break;
            }
        }
        Ok(TopEigen {
            lower: lo,
            upper: hi,
            vector: v,
            rayleigh,
        })
    }

    /// Smallest eigenvalue bracket `(lower, upper)` by bisection on the
    /// definiteness of `H - s I`.
    pub fn bottom_eigenvalue(&self, tol: S::Re) -> (S::Re, S::Re) {
        let one = S::Re::one();
        let (g_lo, _) = self.gershgorin();
        let mut hi = self.min_diagonal();
        let mut lo = g_lo - (g_lo.abs().max(one)) * S::Re::epsilon() * S::Re::of(64.0);
        let mut work = Vec::new();
        if !self.is_positive_definite(one, -lo, &mut work) {
            lo = lo - (lo.abs().max(one)) * S::Re::of(1e-6);
        }
        if hi < lo {
            hi = lo;
        }
        let floor = S::Re::epsilon() * S::Re::of(16.0);
        for _ in 0..200 {
            let scale = lo.abs().max(hi.abs()).max(one);
            if hi - lo <= tol.max(floor) * scale {
                break;
            }
            let mid = lo + (hi - lo) * S::Re::of(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.is_positive_definite(one, -mid, &mut work) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

impl<S: Scalar> HermCholesky<S> {
    /// Solves `L L^H x = b` in place.
    pub fn solve_in_place(&self, x: &mut [S]) {
        let (n, b) = (self.n, self.b);
        let w = b + 1;
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[i * w + k + b - i] * x[k];
            }
            x[i] = s / self.l[i * w + b];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..=(i + b).min(n - 1) {
                s -= self.l[k * w + i + b - k].conj() * x[k];
            }
            x[i] = s / self.l[i * w + b];
        }
    }
}

fn normalize<S: Scalar>(v: &mut [S]) {
    let norm = v.iter().map(|x| x.modulus_sqr()).sum::<S::Re>().sqrt();
    if norm > S::Re::zero() {
        let inv = S::from_re(S::Re::one() / norm);
        for x in v.iter_mut() {
            *x *= inv;
        }
    }
}
