//! The piecewise space-time weight `phi = log omega` of the two-front
//! superposition, the zeroth-order coefficient
//!
//! ```text
//! A0 = J_g(ubar) - phi_t + D phi_x^2
//! ```
//!
//! of the weighted linearization, and the single-front scalar analogue.
//!
//! With `y1 = x - c1 t - psi1` and `y2 = x - c2 t - psi2` the half-plane
//! splits into
//!
//! ```text
//! I1: y1 <= -1    I2: -1 < y1 < 1    I3: y1 >= 1, y2 <= -1
//! I4: -1 < y2 < 1 (and y1 >= 1)      I5: y2 >= 1 (and y1 >= 1)
//! ```
//!
//! and `phi` is `0`, a quadratic in `y1`, linear, a quadratic in `y2`,
//! linear, joined in a C^1 fashion.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::fronts::{FrontProfile, SuperpositionSpec};
use crate::io::{fmt_real, pgm_bytes};
use crate::model::{jacobian, Matrix2, ModelParams, StatePoint};
use crate::speeds::{Margins, SpeedCertificate};
use crate::Real;

/// Cap on the profile slack `epsilon` used on the plateau between fronts.
pub const EPSILON_CAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    I1,
    I2,
    I3,
    I4,
    I5,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 5] = [Self::I1, Self::I2, Self::I3, Self::I4, Self::I5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["I1", "I2", "I3", "I4", "I5"][self.index()]
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The weight is determined by the rates and speeds of a certificate and
/// the shifts of the two fronts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec<T> {
    pub cert: SpeedCertificate<T>,
    pub psi1: T,
    pub psi2: T,
}

/// `phi` and its first derivatives plus `phi_xx` (region-wise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiJet<T> {
    pub value: T,
    pub t: T,
    pub x: T,
    pub xx: T,
}

impl<T: Real> WeightSpec<T> {
    pub fn new(cert: SpeedCertificate<T>, psi1: T, psi2: T) -> Result<Self> {
        if !(cert.c1 < cert.c2) {
            return Err(invalid("c1", "need c1 < c2"));
        }
        if !(cert.kappa1 > T::zero() && cert.kappa2 > T::zero()) {
            return Err(invalid("kappa", "rates must be positive"));
        }
        // the regions I2 and I4 must not overlap at t = 0
        if !(psi2 - psi1 >= T::of(2.0)) {
            return Err(invalid(
                "psi",
                format!("need psi2 - psi1 >= 2, got ({psi1}, {psi2})"),
            ));
        }
        Ok(Self { cert, psi1, psi2 })
    }

    /// Weight from arbitrary rates; the stored margins are evaluated but
    /// not required to be negative.
    pub fn forced(
        c1: T,
        c2: T,
        kappa1: T,
        kappa2: T,
        psi1: T,
        psi2: T,
        p: &ModelParams<T>,
    ) -> Result<Self> {
        let cert = SpeedCertificate {
            c1,
            c2,
            kappa1,
            kappa2,
            margins: Margins::evaluate(c1, c2, kappa1, kappa2, p),
        };
        Self::new(cert, psi1, psi2)
    }

    /// Weight sharing the speeds and shifts of `spec`.
    pub fn for_superposition(
        cert: SpeedCertificate<T>,
        spec: &SuperpositionSpec<T>,
    ) -> Result<Self> {
        let w = Self::new(cert, spec.psi1, spec.psi2)?;
        w.check_consistent(spec)?;
        Ok(w)
    }

    pub fn check_consistent(&self, spec: &SuperpositionSpec<T>) -> Result<()> {
        let tol = T::of(1e-12) * (T::one() + spec.c2.abs());
        let same = (self.cert.c1 - spec.c1).abs() <= tol
            && (self.cert.c2 - spec.c2).abs() <= tol
            && self.psi1 == spec.psi1
            && self.psi2 == spec.psi2;
        if same {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "weight (c1, c2, psi1, psi2) = ({}, {}, {}, {}) vs superposition ({}, {}, {}, {})",
                self.cert.c1,
                self.cert.c2,
                self.psi1,
                self.psi2,
                spec.c1,
                spec.c2,
                spec.psi1,
                spec.psi2
            )))
        }
    }

    #[inline]
    pub fn moving_coordinates(&self, t: T, x: T) -> (T, T) {
        (
            x - self.cert.c1 * t - self.psi1,
            x - self.cert.c2 * t - self.psi2,
        )
    }

    pub fn classify(&self, t: T, x: T) -> RegionLabel {
        let (y1, y2) = self.moving_coordinates(t, x);
        let one = T::one();
        if y1 <= -one {
            RegionLabel::I1
        } else if y1 < one {
            RegionLabel::I2
        } else if y2 <= -one {
            RegionLabel::I3
        } else if y2 < one {
            RegionLabel::I4
        } else {
            RegionLabel::I5
        }
    }

    pub fn phi(&self, t: T, x: T) -> PhiJet<T> {
        let SpeedCertificate {
            c1,
            c2,
            kappa1: k1,
            kappa2: k2,
            ..
        } = self.cert;
        let (y1, y2) = self.moving_coordinates(t, x);
        let half = T::of(0.5);
        let quarter = T::of(0.25);
        let dk = k2 - k1;
        match self.classify(t, x) {
            RegionLabel::I1 => PhiJet {
                value: T::zero(),
                t: T::zero(),
                x: T::zero(),
                xx: T::zero(),
            },
            RegionLabel::I2 => {
                let s = y1 + T::one();
                PhiJet {
                    value: -k1 * quarter * s * s,
                    t: c1 * k1 * half * s,
                    x: -k1 * half * s,
                    xx: -k1 * half,
                }
            }
            RegionLabel::I3 => PhiJet {
                value: -k1 * y1,
                t: k1 * c1,
                x: -k1,
                xx: T::zero(),
            },
            RegionLabel::I4 => {
                let s = y2 + T::one();
                PhiJet {
                    value: -k1 * y1 - dk * quarter * s * s,
                    t: k1 * c1 + dk * c2 * half * s,
                    x: -k1 - dk * half * s,
                    xx: -dk * half,
                }
            }
            RegionLabel::I5 => PhiJet {
                value: -k1 * y1 - dk * y2,
                t: k1 * c1 + dk * c2,
                x: -k2,
                xx: T::zero(),
            },
        }
    }

    /// Diagonal of `-phi_t + D phi_x^2`.
    pub fn potential(&self, t: T, x: T, p: &ModelParams<T>) -> [T; 2] {
        let j = self.phi(t, x);
        let sq = j.x * j.x;
        [p.d * sq - j.t, sq - j.t]
    }
}

pub fn classify_region<T: Real>(t: T, x: T, w: &WeightSpec<T>) -> RegionLabel {
    w.classify(t, x)
}

pub fn phi<T: Real>(t: T, x: T, w: &WeightSpec<T>) -> PhiJet<T> {
    w.phi(t, x)
}

/// `J_g(u) - phi_t + D phi_x^2` at a given state.
pub fn a0_at_state<T: Real>(
    u: StatePoint<T>,
    t: T,
    x: T,
    w: &WeightSpec<T>,
    p: &ModelParams<T>,
) -> Matrix2<T> {
    let [q1, q2] = w.potential(t, x, p);
    let mut m = jacobian(u, p);
    m.a11 += q1;
    m.a22 += q2;
    m
}

/// `A0(t, x)` along the superposition `spec`.
pub fn a0_matrix<T: Real>(
    t: T,
    x: T,
    spec: &SuperpositionSpec<T>,
    w: &WeightSpec<T>,
    p: &ModelParams<T>,
) -> Matrix2<T> {
    a0_at_state(spec.eval(t, x), t, x, w, p)
}

/// `P2(y)` for the diffusion entry `dk` (`d` or `1`): the `I2` value of
/// `-phi_t + D phi_x^2` as a polynomial in `y = y1`.
pub fn p2_poly<T: Real>(y: T, c1: T, kappa1: T, dk: T) -> T {
    let k2d = kappa1 * kappa1 * dk;
    let four = T::of(4.0);
    let two = T::of(2.0);
    k2d / four - c1 * kappa1 / two + y / two * (k2d - c1 * kappa1) + y * y / four * k2d
}

/// `P4(y)` for `y = y2`, likewise on `I4`.
pub fn p4_poly<T: Real>(y: T, c1: T, c2: T, kappa1: T, kappa2: T, dk: T) -> T {
    let four = T::of(4.0);
    let two = T::of(2.0);
    let sum = kappa2 + kappa1;
    let diff = kappa2 - kappa1;
    sum * sum / four * dk - c2 * diff / two - kappa1 * c1
        + y / two * ((kappa2 * kappa2 - kappa1 * kappa1) * dk - c2 * diff)
        + y * y / four * diff * diff * dk
}

/// `epsilon = min(eps_sat / 2, 0.1)` where `eps_sat` saturates
/// `d kappa1^2 - c1 kappa1 - r + 2 r eps < 0`.
pub fn epsilon_rule<T: Real>(cert: &SpeedCertificate<T>, p: &ModelParams<T>) -> Result<T> {
    let k = cert.kappa1;
    let base = p.d * k * k - cert.c1 * k - p.r;
    if !(base < T::zero()) {
        return Err(invalid(
            "kappa1",
            format!("d k^2 - c1 k - r = {base} is not negative"),
        ));
    }
    let sat = -base / (p.r + p.r);
    Ok((sat * T::of(0.5)).min(T::of(EPSILON_CAP)))
}

/// Region-wise upper bounds for the two diagonal entries of `A0`, valid
/// when `ubar >= (1, 1)` on `I1`, `I2`, `ubar_1 >= 1 - eps` on `I3`, `I4`,
/// `0 <= ubar <= 2` everywhere.
pub fn region_bounds<T: Real>(w: &WeightSpec<T>, p: &ModelParams<T>, eps: T) -> [[T; 2]; 5] {
    let SpeedCertificate {
        c1,
        c2,
        kappa1: k1,
        kappa2: k2,
        ..
    } = w.cert;
    let two_a = T::of(2.0) * p.alpha1.max(p.alpha2);
    let one = T::one();
    let a1d = p.d * k1 * k1 - c1 * k1;
    let a1u = k1 * k1 - c1 * k1;
    let lead = k1 * (c2 - c1);
    let b2d = p.d * k2 * k2 - c2 * k2 + lead;
    let b2u = k2 * k2 - c2 * k2 + lead;
    let slack = T::of(2.0) * p.r * eps;
    [
        [two_a - p.r, two_a - one],
        [two_a + (-p.r).max(a1d - p.r), two_a + (-one).max(a1u - one)],
        // the second component is not bounded below on the plateau
        [two_a + a1d - p.r + slack, two_a + a1u + one],
        [
            two_a + slack + (a1d - p.r).max(b2d - p.r),
            two_a + (a1u + one).max(b2u + one),
        ],
        [two_a + b2d + p.r, two_a + b2u + one],
    ]
}

/// Uniform rectangle `[t0, t1] x [x0, x1]` with steps `dt`, `dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRect<T> {
    pub t0: T,
    pub t1: T,
    pub dt: T,
    pub x0: T,
    pub x1: T,
    pub dx: T,
}

impl<T: Real> GridRect<T> {
    pub fn new(t0: T, t1: T, dt: T, x0: T, x1: T, dx: T) -> Result<Self> {
        if !(t0 >= T::zero() && t1 >= t0 && dt > T::zero()) {
            return Err(invalid("t", "need 0 <= t0 <= t1 and dt > 0"));
        }
        if !(x1 > x0 && dx > T::zero()) {
            return Err(invalid("x", "need x0 < x1 and dx > 0"));
        }
        Ok(Self {
            t0,
            t1,
            dt,
            x0,
            x1,
            dx,
        })
    }

    fn count(a: T, b: T, h: T) -> usize {
        ((b - a) / h + T::of(1e-9)).floor().to_usize().unwrap_or(0) + 1
    }

    pub fn t_points(&self) -> Vec<T> {
        (0..Self::count(self.t0, self.t1, self.dt))
            .map(|i| self.t0 + T::of_usize(i) * self.dt)
            .collect()
    }

    pub fn x_points(&self) -> Vec<T> {
        (0..Self::count(self.x0, self.x1, self.dx))
            .map(|i| self.x0 + T::of_usize(i) * self.dx)
            .collect()
    }
}

/// Outcome of a grid sweep of the diagonal of `A0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagBound<T> {
    /// `-max` over the grid of both diagonal entries.
    pub eta: T,
    pub t: T,
    pub x: T,
    pub component: usize,
    pub region: RegionLabel,
    /// Largest diagonal entry per region and component; `-inf` for regions
    /// the grid does not reach.
    pub region_max: [[T; 2]; 5],
    pub points: usize,
}

impl<T: Real> DiagBound<T> {
    pub fn covers_all_regions(&self) -> bool {
        self.region_max.iter().all(|m| m[0] > T::neg_infinity())
    }
}

pub fn diag_bound_check<T: Real>(
    spec: &SuperpositionSpec<T>,
    w: &WeightSpec<T>,
    p: &ModelParams<T>,
    grid: &GridRect<T>,
) -> Result<DiagBound<T>> {
    w.check_consistent(spec)?;
    let ts = grid.t_points();
    let xs = grid.x_points();
    let mut region_max = [[T::neg_infinity(); 2]; 5];
    let mut best = (
        T::neg_infinity(),
        T::zero(),
        T::zero(),
        0usize,
        RegionLabel::I1,
    );
    for &t in &ts {
        for &x in &xs {
            let m = a0_matrix(t, x, spec, w, p);
            let reg = w.classify(t, x);
            let slot = &mut region_max[reg.index()];
            for (k, v) in [m.a11, m.a22].into_iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::BlowUp {
                        t: t.to_f64_lossy(),
                        x: x.to_f64_lossy(),
                    });
                }
                if v > slot[k] {
                    slot[k] = v;
                }
                if v > best.0 {
                    best = (v, t, x, k, reg);
                }
            }
        }
    }
    Ok(DiagBound {
        eta: -best.0,
        t: best.1,
        x: best.2,
        component: best.3,
        region: best.4,
        region_max,
        points: ts.len() * xs.len(),
    })
}

/// Largest `alpha` in `[lo, hi]` for which `holds` is true, by bisection
/// down to `resolution`. Assumes `holds` is true below the threshold and
/// false above it; `None` when it already fails at `lo`.
pub fn alpha_threshold<T: Real, F>(lo: T, hi: T, resolution: T, mut holds: F) -> Result<Option<T>>
where
    F: FnMut(T) -> Result<bool>,
{
    if !(lo < hi && resolution > T::zero()) {
        return Err(invalid("alpha", "need lo < hi and a positive resolution"));
    }
    if !holds(lo)? {
        return Ok(None);
    }
    if holds(hi)? {
        return Ok(Some(hi));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > resolution {
        let m = (a + b) * T::of(0.5);
        if holds(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(a))
}

/// Diagonal of `A0` and `phi` sampled on a grid; row-major with one row
/// per time, first row `t = t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMaps<T> {
    pub t: Vec<T>,
    pub x: Vec<T>,
    pub phi: Vec<T>,
    pub a11: Vec<T>,
    pub a22: Vec<T>,
}

impl<T: Real> WeightMaps<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,phi,a11,a22\n");
        let nx = self.x.len();
        for (i, &t) in self.t.iter().enumerate() {
            for (j, &x) in self.x.iter().enumerate() {
                let k = i * nx + j;
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_real(t),
                    fmt_real(x),
                    fmt_real(self.phi[k]),
                    fmt_real(self.a11[k]),
                    fmt_real(self.a22[k])
                ));
            }
        }
        s
    }

    pub fn pgm(&self, field: &[T]) -> Vec<u8> {
        pgm_bytes(field, self.x.len(), self.t.len())
    }
}

pub fn weight_maps<T: Real>(
    spec: &SuperpositionSpec<T>,
    w: &WeightSpec<T>,
    p: &ModelParams<T>,
    grid: &GridRect<T>,
) -> Result<WeightMaps<T>> {
    w.check_consistent(spec)?;
    let t = grid.t_points();
    let x = grid.x_points();
    let n = t.len() * x.len();
    let mut maps = WeightMaps {
        phi: Vec::with_capacity(n),
        a11: Vec::with_capacity(n),
        a22: Vec::with_capacity(n),
        t,
        x,
    };
    for &ti in &maps.t {
        for &xj in &maps.x {
            let m = a0_matrix(ti, xj, spec, w, p);
            maps.phi.push(w.phi(ti, xj).value);
            maps.a11.push(m.a11);
            maps.a22.push(m.a22);
        }
    }
    Ok(maps)
}

/// Single-front weight `0 / -kappa (y+1)^2 / 4 / -kappa y` in `y = x - c t`
/// together with a KPP profile pinned so that `p(1) = 3/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarWeight<T> {
    pub c: T,
    pub kappa: T,
    pub d: T,
    pub r: T,
    pub profile: FrontProfile<T>,
}

impl<T: Real> ScalarWeight<T> {
    pub fn new(c: T, kappa: T, profile: &FrontProfile<T>, d: T, r: T) -> Result<Self> {
        if !(c > T::of(2.0) * (d * r).sqrt()) {
            return Err(invalid("c", format!("need c > 2 sqrt(d r), got {c}")));
        }
        if !(kappa > T::zero()) {
            return Err(invalid("kappa", "rate must be positive"));
        }
        let at = profile.level_crossing(0, T::of(0.75))?;
        Ok(Self {
            c,
            kappa,
            d,
            r,
            profile: profile.translated(T::one() - at),
        })
    }

    /// `(phi_t, phi_x)`.
    pub fn phi_derivatives(&self, t: T, x: T) -> (T, T) {
        let y = x - self.c * t;
        let one = T::one();
        let half = T::of(0.5);
        if y <= -one {
            (T::zero(), T::zero())
        } else if y < one {
            let s = y + one;
            (self.c * self.kappa * half * s, -self.kappa * half * s)
        } else {
            (self.c * self.kappa, -self.kappa)
        }
    }

    /// `r (1 - 2 p) - phi_t + d phi_x^2`.
    pub fn a0(&self, t: T, x: T) -> T {
        let p = self.profile.eval(x - self.c * t).u1;
        let (pt, px) = self.phi_derivatives(t, x);
        self.r * (T::one() - p - p) - pt + self.d * px * px
    }
}

pub fn scalar_a0<T: Real>(
    t: T,
    x: T,
    c: T,
    kappa: T,
    profile: &FrontProfile<T>,
    d: T,
    r: T,
) -> Result<T> {
    Ok(ScalarWeight::new(c, kappa, profile, d, r)?.a0(t, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronts::kpp_profile;

    fn params() -> ModelParams<f64> {
        ModelParams::new(4.0, 2.0, 0.05, 0.05).unwrap()
    }

    fn spec() -> WeightSpec<f64> {
        WeightSpec::forced(3.0, 13.2, 0.7929, 1.65, -10.0, 10.0, &params()).unwrap()
    }

    #[test]
    fn classification_examples() {
        let w = spec();
        assert_eq!(w.classify(0.0, -12.0), RegionLabel::I1);
        assert_eq!(w.classify(0.0, -11.0), RegionLabel::I1);
        assert_eq!(w.classify(0.0, -10.0), RegionLabel::I2);
        assert_eq!(w.classify(0.0, -9.0), RegionLabel::I3);
        assert_eq!(w.classify(0.0, 9.0), RegionLabel::I3);
        assert_eq!(w.classify(0.0, 10.0), RegionLabel::I4);
        assert_eq!(w.classify(0.0, 11.0), RegionLabel::I5);
        assert_eq!(w.classify(1.0, 10.0 + 13.2 + 2.0), RegionLabel::I5);
    }

    #[test]
    fn phi_values() {
        let w = spec();
        let j = w.phi(2.0, -20.0);
        assert_eq!((j.value, j.t, j.x, j.xx), (0.0, 0.0, 0.0, 0.0));
        let j = w.phi(0.0, -11.0 + 1e-13);
        assert!(j.value.abs() < 1e-20 && j.x.abs() < 1e-12);
        // I5 equals the shifted form of the linear weight
        let (t, x) = (3.0, 60.0);
        let (k1, k2, c1, c2) = (0.7929, 1.65, 3.0, 13.2);
        let expect = -k1 * (c2 - c1) * t - k2 * (x - c2 * t) + k1 * (-10.0) + (k2 - k1) * 10.0;
        assert!((w.phi(t, x).value - expect).abs() < 1e-12);
    }

    #[test]
    fn phi_is_path_integral_of_phi_x() {
        let w = spec();
        let t = 1.5;
        let (a, b) = (-20.0, 40.0);
        let n = 600_000;
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * h;
            acc += w.phi(t, x).x * h;
        }
        assert!((acc - w.phi(t, b).value).abs() < 1e-8);
    }

    #[test]
    fn potential_matches_region_polynomials() {
        let p = params();
        let w = spec();
        let SpeedCertificate {
            c1,
            c2,
            kappa1: k1,
            kappa2: k2,
            ..
        } = w.cert;
        for i in 0..200 {
            let t = 0.1 * i as f64;
            let x2 = c1 * t - 10.0 - 0.995 + 0.00995 * i as f64;
            assert_eq!(w.classify(t, x2), RegionLabel::I2);
            let y1 = w.moving_coordinates(t, x2).0;
            let [q1, q2] = w.potential(t, x2, &p);
            assert!((q1 - p2_poly(y1, c1, k1, p.d)).abs() < 1e-10);
            assert!((q2 - p2_poly(y1, c1, k1, 1.0)).abs() < 1e-10);
            let x4 = c2 * t + 10.0 - 0.995 + 0.00995 * i as f64;
            assert_eq!(w.classify(t, x4), RegionLabel::I4);
            let y2 = w.moving_coordinates(t, x4).1;
            let [q1, q2] = w.potential(t, x4, &p);
            assert!((q1 - p4_poly(y2, c1, c2, k1, k2, p.d)).abs() < 1e-10);
            assert!((q2 - p4_poly(y2, c1, c2, k1, k2, 1.0)).abs() < 1e-10);
        }
        let dd = p.d;
        assert!(p2_poly(-1.0, c1, k1, dd).abs() < 1e-14);
        assert!((p2_poly(1.0, c1, k1, dd) - (dd * k1 * k1 - c1 * k1)).abs() < 1e-12);
        assert!((p4_poly(-1.0, c1, c2, k1, k2, dd) - (dd * k1 * k1 - c1 * k1)).abs() < 1e-12);
        let p41 = dd * k2 * k2 - c2 * k2 + k1 * (c2 - c1);
        assert!((p4_poly(1.0, c1, c2, k1, k2, dd) - p41).abs() < 1e-12);
    }

    #[test]
    fn plateau_and_leading_edge_forms() {
        let p = params();
        let w = spec();
        let u = StatePoint::new(0.95, 0.3);
        let m = a0_at_state(u, 0.0, 0.0, &w, &p);
        let j = jacobian(u, &p);
        let k1 = w.cert.kappa1;
        assert!((m.a11 - (j.a11 + 4.0 * k1 * k1 - 3.0 * k1)).abs() < 1e-12);
        assert!((m.a22 - (j.a22 + k1 * k1 - 3.0 * k1)).abs() < 1e-12);
        assert_eq!((m.a12, m.a21), (0.05 * 0.95, 0.05 * 0.3));
        let m5 = a0_at_state(StatePoint::zero(), 0.0, 100.0, &w, &p);
        assert!((m5.a11 - w.cert.margins.c).abs() < 1e-12);
    }

    #[test]
    fn epsilon_for_compliant_rates() {
        let eps = epsilon_rule(&spec().cert, &params()).unwrap();
        assert_eq!(eps, 0.1);
        let small = WeightSpec::forced(3.0, 13.2, 0.74, 1.65, -10.0, 10.0, &params()).unwrap();
        let e2 = epsilon_rule(&small.cert, &params()).unwrap();
        assert!(e2 <= 0.1 && e2 > 0.0);
    }

    #[test]
    fn bisection_threshold() {
        let got = alpha_threshold(0.0, 1.0, 1e-3, |a| Ok(a < 0.3141))
            .unwrap()
            .unwrap();
        assert!(got < 0.3141 && 0.3141 - got <= 1e-3);
        assert_eq!(
            alpha_threshold(0.0, 1.0, 1e-3, |_| Ok(false)).unwrap(),
            None
        );
        assert_eq!(
            alpha_threshold(0.0, 1.0, 1e-3, |_| Ok(true)).unwrap(),
            Some(1.0)
        );
    }

    #[test]
    fn scalar_weight_sign() {
        let prof = kpp_profile(6.0f64, 4.0, 2.0, 100.0, 4001).unwrap();
        let sw = ScalarWeight::new(6.0, 0.75, &prof, 4.0, 2.0).unwrap();
        assert!((sw.profile.eval(1.0).u1 - 0.75).abs() < 1e-6);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=200 {
            let t = 0.05 * i as f64;
            for j in 0..=2000 {
                let x = -40.0 + 0.05 * j as f64 + 6.0 * t;
                let a = sw.a0(t, x);
                let y = x - 6.0 * t;
                if y <= -1.0 {
                    assert!(a <= -1.0 + 1e-9);
                }
                if y >= 1.0 {
                    let pv = sw.profile.eval(y).u1;
                    assert!((a - (-4.0 * pv - 0.25)).abs() < 1e-12);
                }
                worst = worst.max(a);
            }
        }
        assert!(worst < 0.0 && worst > -0.26);
        assert!(scalar_a0(0.0, 5.0, 6.0, 0.75, &prof, 4.0, 2.0).unwrap() < 0.0);
    }
}
