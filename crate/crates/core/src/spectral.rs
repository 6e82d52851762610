//! Discretized weighted linear operator
//!
//! ```text
//! L(t) w = D w_xx + 2 D phi_x w_x + (J_g(ubar) - phi_t + D (phi_xx + phi_x^2)) w
//! ```
//!
//! on a truncated interval with homogeneous Dirichlet data, its field of
//! values, sector inclusion and resolvent bounds.
//!
//! Grid functions are interleaved: unknown `2 i + k` is component `k` at
//! interior node `i`. Rayleigh quotients are taken in the Euclidean inner
//! product; the `dx` weight of the discrete L2 pairing cancels from them.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::fronts::SuperpositionSpec;
use crate::io::fmt_real;
use crate::linalg::{BandMatrix, HermBand};
use crate::model::equilibria;
use crate::model::{jacobian, EquilibriumSet, Matrix2, ModelParams, StatePoint};
use crate::weights::{PhiJet, WeightSpec};
use crate::Real;

/// Relative tolerance of the Hermitian eigen-bisection.
pub const EIGEN_TOL: f64 = 1e-12;
/// Allowed distance of `ubar` from an equilibrium at the domain ends.
pub const END_STATE_TOL: f64 = 1e-6;

/// Outcome of the 2x2 lemma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nr2x2<T> {
    /// `Re <A Z, Z> <= -eta |Z|^2` for every `Z`.
    Margin(T),
    /// The hypothesis `|b + c| / 2 < sqrt(a d)` fails by `excess`.
    Violation { excess: T },
}

/// Guaranteed margin `(sqrt(a d) - |b + c| / 2) min(e, 1/e)`, `e = sqrt(a / d)`.
pub fn nr_2x2_margin<T: Real>(m: &Matrix2<T>) -> Result<Nr2x2<T>> {
    let (a, b, c, d) = (m.a11, m.a12, m.a21, m.a22);
    if !(a < T::zero() && d < T::zero()) {
        return Err(invalid(
            "A",
            format!("diagonal entries must be negative, got ({a}, {d})"),
        ));
    }
    let root = (a * d).sqrt();
    let off = (b + c).abs() * T::of(0.5);
    if !(off < root) {
        return Ok(Nr2x2::Violation { excess: off - root });
    }
    let e = (a / d).sqrt();
    Ok(Nr2x2::Margin((root - off) * e.min(e.recip())))
}

/// `min` over unit `Z` of `-Re <A Z, Z>`, i.e. minus the top eigenvalue
/// of the symmetric part.
pub fn nr_2x2_exact<T: Real>(m: &Matrix2<T>) -> T {
    let s = (m.a12 + m.a21) * T::of(0.5);
    let mean = (m.a11 + m.a22) * T::of(0.5);
    let half = (m.a11 - m.a22) * T::of(0.5);
    -(mean + (half * half + s * s).sqrt())
}

/// Interior grid of `n` nodes strictly inside `(x_lo, x_hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorDomain<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub n: usize,
}

impl<T: Real> OperatorDomain<T> {
    pub fn new(x_lo: T, x_hi: T, n: usize) -> Result<Self> {
        if !(x_lo < x_hi) {
            return Err(invalid("domain", "need x_lo < x_hi"));
        }
        if n < 3 {
            return Err(invalid("n", "need at least three interior nodes"));
        }
        Ok(Self { x_lo, x_hi, n })
    }

    pub fn dx(&self) -> T {
        (self.x_hi - self.x_lo) / T::of_usize(self.n + 1)
    }

    pub fn point(&self, i: usize) -> T {
        self.x_lo + T::of_usize(i + 1) * self.dx()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator<T> {
    pub t: T,
    pub domain: OperatorDomain<T>,
    /// `2n x 2n`, interleaved components.
    pub matrix: BandMatrix<T>,
}

impl<T: Real> DiscreteOperator<T> {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        self.matrix.to_dense()
    }
}

/// Assembles the operator from pointwise coefficients `x -> (ubar, phi)`.
pub fn assemble<T: Real, F>(
    t: T,
    domain: OperatorDomain<T>,
    p: &ModelParams<T>,
    coeffs: F,
) -> DiscreteOperator<T>
where
    F: Fn(T) -> (StatePoint<T>, PhiJet<T>),
{
    let n = domain.n;
    let h = domain.dx();
    let inv_h2 = T::one() / (h * h);
    let inv_2h = T::of(0.5) / h;
    let diff = p.diffusion();
    let mut m = BandMatrix::zeros(2 * n, 2, 2);
    for i in 0..n {
        let (u, ph) = coeffs(domain.point(i));
        let j = jacobian(u, p);
        let common = ph.xx + ph.x * ph.x;
        for k in 0..2 {
            let row = 2 * i + k;
            let dk = diff[k];
            let adv = dk * ph.x * T::of(2.0) * inv_2h;
            let (jkk, jko) = if k == 0 {
                (j.a11, j.a12)
            } else {
                (j.a22, j.a21)
            };
            m.set(
                row,
                row,
                -dk * T::of(2.0) * inv_h2 + jkk - ph.t + dk * common,
            );
            m.set(row, 2 * i + 1 - k, jko);
            if i > 0 {
                m.set(row, row - 2, dk * inv_h2 - adv);
            }
            if i + 1 < n {
                m.set(row, row + 2, dk * inv_h2 + adv);
            }
        }
    }
    DiscreteOperator {
        t,
        domain,
        matrix: m,
    }
}

fn nearest_equilibrium<T: Real>(u: StatePoint<T>, eq: &EquilibriumSet<T>) -> T {
    eq.as_array()
        .iter()
        .map(|e| (u - *e).norm_inf())
        .fold(T::infinity(), T::min)
}

/// `L(t)` for the superposition `spec` with weight `w`.
pub fn build_operator<T: Real>(
    t: T,
    spec: &SuperpositionSpec<T>,
    w: &WeightSpec<T>,
    p: &ModelParams<T>,
    domain: OperatorDomain<T>,
) -> Result<DiscreteOperator<T>> {
    w.check_consistent(spec)?;
    let eq = equilibria(p)?;
    for x in [domain.x_lo, domain.x_hi] {
        let dist = nearest_equilibrium(spec.eval(t, x), &eq);
        if !(dist <= T::of(END_STATE_TOL)) {
            return Err(Error::DomainTooNarrow {
                x: x.to_f64_lossy(),
                distance: dist.to_f64_lossy(),
            });
        }
    }
    Ok(assemble(t, domain, p, |x| (spec.eval(t, x), w.phi(t, x))))
}

/// Inner approximation of the numerical range: one boundary point per
/// angle, plus the support values that bound it from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOfValues<T> {
    pub thetas: Vec<T>,
    /// Rayleigh quotients `<M u, u>` of the top eigenvectors.
    pub points: Vec<Complex<T>>,
    /// `h(theta) = lambda_max((e^{i theta} M + h.c.) / 2)`: the range lies in
    /// `Re(e^{i theta} z) <= h(theta)`.
    pub support: Vec<T>,
}

impl<T: Real> FieldOfValues<T> {
    /// Largest real part over the range (support value at `theta = 0`).
    pub fn max_re(&self) -> T {
        self.support[0]
    }

    /// Vertices of the circumscribed polygon cut out by consecutive
    /// supporting half-planes.
    pub fn outer_vertices(&self) -> Vec<Complex<T>> {
        let n = self.thetas.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let k = (j + 1) % n;
            let (a, b) = (self.thetas[j], self.thetas[k]);
            // cos(a) x - sin(a) y = h_a, cos(b) x - sin(b) y = h_b
            let det = -a.cos() * b.sin() + a.sin() * b.cos();
            if det.abs() < T::of(1e-14) {
                continue;
            }
            let (ha, hb) = (self.support[j], self.support[k]);
            let x = (-ha * b.sin() + hb * a.sin()) / det;
            let y = (a.cos() * hb - b.cos() * ha) / det;
            out.push(Complex::new(x, y));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,re,im,support\n");
        for ((t, z), h) in self.thetas.iter().zip(&self.points).zip(&self.support) {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt_real(*t),
                fmt_real(z.re),
                fmt_real(z.im),
                fmt_real(*h)
            ));
        }
        s
    }
}

fn complexify<T: Real>(m: &BandMatrix<T>) -> BandMatrix<Complex<T>> {
    m.map(|v| Complex::new(v, T::zero()))
}

fn rayleigh<T: Real>(m: &BandMatrix<Complex<T>>, u: &[Complex<T>]) -> Complex<T> {
    let mu = m.mul_vec(u);
    let num: Complex<T> = u
        .iter()
        .zip(&mu)
        .map(|(a, b)| a.conj() * b)
        .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v);
    let den: T = u.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

/// Field of values of a real matrix, sampled at `n_angles` equally spaced
/// rotations starting from `theta = 0`.
pub fn field_of_values<T: Real>(m: &BandMatrix<T>, n_angles: usize) -> Result<FieldOfValues<T>> {
    field_of_values_complex(&complexify(m), n_angles)
}

pub fn field_of_values_complex<T: Real>(
    m: &BandMatrix<Complex<T>>,
    n_angles: usize,
) -> Result<FieldOfValues<T>> {
    if n_angles < 8 {
        return Err(invalid("n_angles", "need at least 8 angles"));
    }
    let mut fov = FieldOfValues {
        thetas: Vec::with_capacity(n_angles),
        points: Vec::with_capacity(n_angles),
        support: Vec::with_capacity(n_angles),
    };
    for j in 0..n_angles {
        let theta = T::TAU() * T::of_usize(j) / T::of_usize(n_angles);
        let rot = Complex::new(theta.cos(), theta.sin());
        let h = HermBand::rotated_hermitian_part(m, rot);
        let top = h
            .top_eigen(T::of(EIGEN_TOL))
            .map_err(|_| Error::Eigensolver {
                theta: theta.to_f64_lossy(),
            })?;
        fov.thetas.push(theta);
        fov.points.push(rayleigh(m, &top.vector));
        fov.support.push(top.upper);
    }
    Ok(fov)
}

/// `S = { Re z <= -eta (1 + |Im z|) }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSpec<T> {
    pub eta: T,
}

impl<T: Real> SectorSpec<T> {
    pub fn new(eta: T) -> Result<Self> {
        if !(eta > T::zero()) {
            return Err(invalid("eta", "sector rate must be positive"));
        }
        Ok(Self { eta })
    }

    /// `Re z + eta (1 + |Im z|)`; non-positive inside the sector.
    pub fn margin(&self, z: Complex<T>) -> T {
        z.re + self.eta * (T::one() + z.im.abs())
    }

    pub fn contains(&self, z: Complex<T>) -> bool {
        !(self.margin(z) > T::zero())
    }

    /// Euclidean distance from `z` to the sector.
    pub fn distance(&self, z: Complex<T>) -> T {
        if self.contains(z) {
            return T::zero();
        }
        let eta = self.eta;
        let (a, b) = (z.re, z.im.abs());
        // boundary ray x + eta y + eta = 0, y >= 0, from the apex (-eta, 0)
        let norm2 = T::one() + eta * eta;
        let s = a + eta * b + eta;
        let foot_y = b - eta * s / norm2;
        if foot_y >= T::zero() {
            s / norm2.sqrt()
        } else {
            ((a + eta) * (a + eta) + b * b).sqrt()
        }
    }
}

/// `(ok, worst margin)`.
pub fn sector_check<T: Real>(points: &[Complex<T>], s: &SectorSpec<T>) -> (bool, T) {
    let worst = points
        .iter()
        .map(|z| s.margin(*z))
        .fold(T::neg_infinity(), T::max);
    (!(worst > T::zero()), worst)
}

/// Largest `eta` (to `resolution`) with every point in the sector; `None`
/// when some point has non-negative real part.
pub fn max_sector_eta<T: Real>(points: &[Complex<T>], resolution: T) -> Option<T> {
    let max_re = points.iter().map(|z| z.re).fold(T::neg_infinity(), T::max);
    if !(max_re < T::zero()) {
        return None;
    }
    let ok = |eta: T| sector_check(points, &SectorSpec { eta }).0;
    let (mut lo, mut hi) = (T::zero(), -max_re);
    if ok(hi) {
        return Some(hi);
    }
    while hi - lo > resolution {
        let mid = (lo + hi) * T::of(0.5);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > T::zero()).then_some(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventSample<T> {
    pub lambda: Complex<T>,
    pub sigma_min: T,
    pub dist: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventReport<T> {
    pub samples: Vec<ResolventSample<T>>,
    pub min_ratio: T,
}

impl<T: Real> ResolventReport<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda_re,lambda_im,sigma_min,dist,ratio\n");
        for r in &self.samples {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_real(r.lambda.re),
                fmt_real(r.lambda.im),
                fmt_real(r.sigma_min),
                fmt_real(r.dist),
                fmt_real(r.ratio)
            ));
        }
        s
    }
}

/// Smallest singular value of `lambda I - M`.
pub fn sigma_min<T: Real>(m: &BandMatrix<T>, lambda: Complex<T>) -> T {
    let shifted = complexify(m).map(|v| -v).shifted(lambda);
    let g = HermBand::gram(&shifted);
    let (lo, hi) = g.bottom_eigenvalue(T::of(EIGEN_TOL));
    ((lo + hi) * T::of(0.5)).max(T::zero()).sqrt()
}

/// `sigma_min(lambda I - M) / dist(lambda, S)` at every sample.
pub fn resolvent_check<T: Real>(
    m: &BandMatrix<T>,
    s: &SectorSpec<T>,
    lambdas: &[Complex<T>],
) -> Result<ResolventReport<T>> {
    let mut samples = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let dist = s.distance(lambda);
        if !(dist > T::zero()) {
            return Err(invalid(
                "lambda",
                format!("sample {lambda} lies inside the sector"),
            ));
        }
        let sm = sigma_min(m, lambda);
        samples.push(ResolventSample {
            lambda,
            sigma_min: sm,
            dist,
            ratio: sm / dist,
        });
    }
    let min_ratio = samples.iter().map(|r| r.ratio).fold(T::infinity(), T::min);
    Ok(ResolventReport { samples, min_ratio })
}

/// `count` deterministic points outside `S`, spread over both half-planes
/// and distances from `1e-2` to `1e2` beyond the sector boundary.
pub fn resolvent_samples<T: Real>(s: &SectorSpec<T>, count: usize) -> Vec<Complex<T>> {
    (0..count)
        .map(|k| {
            let f = T::of_usize(k) / T::of_usize(count.max(2) - 1);
            let im = T::of(60.0) * (f - T::of(0.5)) * T::of(if k % 2 == 0 { 1.0 } else { -1.0 });
            let gap = T::of(10.0)
                .powf(T::of(-2.0) + T::of(4.0) * T::of_usize((k * 7) % count) / T::of_usize(count));
            Complex::new(-s.eta * (T::one() + im.abs()) + gap, im)
        })
        .collect()
}
