//! Closed-form algebra of the reaction term: reaction, Jacobian, equilibria
//! and their spectral classification.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::Real;

/// Threshold on the largest real part below which an equilibrium counts as
/// stable.
pub const STABILITY_TOL: f64 = 1e-12;

/// Residual bound `|g(u)|` accepted by [`classify_equilibrium`].
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// The four positive parameters `(d, r, alpha1, alpha2)`; the diffusion
/// matrix is `diag(d, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub d: T,
    pub r: T,
    pub alpha1: T,
    pub alpha2: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(d: T, r: T, alpha1: T, alpha2: T) -> Result<Self> {
        let check = |name: &'static str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        check("d", d)?;
        check("r", r)?;
        check("alpha1", alpha1)?;
        check("alpha2", alpha2)?;
        Ok(Self {
            d,
            r,
            alpha1,
            alpha2,
        })
    }

    /// `d > 1`, `r > 1` and `r - alpha1 alpha2 > 0`.
    pub fn assumption_ok(&self) -> bool {
        self.d > T::one() && self.r > T::one() && self.coexistence_det() > T::zero()
    }

    /// `r - alpha1 alpha2`, the denominator of the coexistence state.
    pub fn coexistence_det(&self) -> T {
        self.r - self.alpha1 * self.alpha2
    }

    pub fn diffusion(&self) -> [T; 2] {
        [self.d, T::one()]
    }

    pub fn with_alphas(&self, alpha1: T, alpha2: T) -> Self {
        Self {
            alpha1,
            alpha2,
            ..*self
        }
    }
}

/// A point `(u1, u2)` of the state space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatePoint<T> {
    pub u1: T,
    pub u2: T,
}

impl<T: Real> StatePoint<T> {
    pub const fn new(u1: T, u2: T) -> Self {
        Self { u1, u2 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn splat(v: T) -> Self {
        Self::new(v, v)
    }

    pub fn get(&self, component: usize) -> T {
        match component {
            0 => self.u1,
            1 => self.u2,
            _ => panic!("state component {component} out of range"),
        }
    }

    pub fn set(&mut self, component: usize, value: T) {
        match component {
            0 => self.u1 = value,
            1 => self.u2 = value,
            _ => panic!("state component {component} out of range"),
        }
    }

    pub fn to_array(self) -> [T; 2] {
        [self.u1, self.u2]
    }

    pub fn from_array(a: [T; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    pub fn norm_inf(&self) -> T {
        self.u1.abs().max(self.u2.abs())
    }

    pub fn norm_sqr(&self) -> T {
        self.u1 * self.u1 + self.u2 * self.u2
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    /// Component-wise product.
    pub fn hadamard(self, other: Self) -> Self {
        Self::new(self.u1 * other.u1, self.u2 * other.u2)
    }
}

impl<T: Real> Add for StatePoint<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.u1 + o.u1, self.u2 + o.u2)
    }
}

impl<T: Real> Sub for StatePoint<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.u1 - o.u1, self.u2 - o.u2)
    }
}

impl<T: Real> Neg for StatePoint<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.u1, -self.u2)
    }
}

impl<T: Real> Mul<T> for StatePoint<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.u1 * s, self.u2 * s)
    }
}

/// Real 2x2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Real> Matrix2<T> {
    pub const fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Self::diag(T::one(), T::one())
    }

    pub fn diag(a: T, b: T) -> Self {
        Self::new(a, T::zero(), T::zero(), b)
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply(&self, v: StatePoint<T>) -> StatePoint<T> {
        StatePoint::new(
            self.a11 * v.u1 + self.a12 * v.u2,
            self.a21 * v.u1 + self.a22 * v.u2,
        )
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn diagonal(&self) -> [T; 2] {
        [self.a11, self.a22]
    }

    /// Eigenvalues from the trace/determinant formula, ordered by decreasing
    /// real part.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let two = T::one() + T::one();
        let half_tr = self.trace() / two;
        let disc = half_tr * half_tr - self.det();
        if disc >= T::zero() {
            let s = disc.sqrt();
            [
                Complex::new(half_tr + s, T::zero()),
                Complex::new(half_tr - s, T::zero()),
            ]
        } else {
            let s = (-disc).sqrt();
            [Complex::new(half_tr, s), Complex::new(half_tr, -s)]
        }
    }

    pub fn max_real_eigenvalue(&self) -> T {
        self.eigenvalues()[0].re
    }

    /// Matrix exponential `exp(self)` in closed form.
    pub fn exp(&self) -> Self {
        let two = T::one() + T::one();
        let m = self.trace() / two;
        // self = m I + N with tr N = 0, N^2 = q I
        let n = Self::new(self.a11 - m, self.a12, self.a21, self.a22 - m);
        let q = -n.det();
        let (c, s) = if q.abs() < T::of(1e-8) {
            // cosh(sqrt q) and sinh(sqrt q)/sqrt q as series in q
            let c = T::one() + q / two + q * q / T::of(24.0);
            let s = T::one() + q / T::of(6.0) + q * q / T::of(120.0);
            (c, s)
        } else if q > T::zero() {
            let w = q.sqrt();
            (w.cosh(), w.sinh() / w)
        } else {
            let w = (-q).sqrt();
            (w.cos(), w.sin() / w)
        };
        let e = m.exp();
        Self::new(
            e * (c + s * n.a11),
            e * s * n.a12,
            e * s * n.a21,
            e * (c + s * n.a22),
        )
    }
}

/// Spectral classification of a constant equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

/// The constant equilibria: coexistence `e1`, species-2-only `e2`,
/// species-1-only `e3` and the empty state `e4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSet<T> {
    pub e1: StatePoint<T>,
    pub e2: StatePoint<T>,
    pub e3: StatePoint<T>,
    pub e4: StatePoint<T>,
}

impl<T: Real> EquilibriumSet<T> {
    pub fn as_array(&self) -> [StatePoint<T>; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }

    pub fn named(&self) -> [(&'static str, StatePoint<T>); 4] {
        [
            ("e1", self.e1),
            ("e2", self.e2),
            ("e3", self.e3),
            ("e4", self.e4),
        ]
    }
}

/// The reaction term `g(u)`.
#[inline]
pub fn reaction<T: Real>(u: StatePoint<T>, p: &ModelParams<T>) -> StatePoint<T> {
    StatePoint::new(
        p.r * u.u1 * (T::one() - u.u1) + p.alpha1 * u.u1 * u.u2,
        u.u2 * (T::one() - u.u2) + p.alpha2 * u.u1 * u.u2,
    )
}

/// Jacobian of the reaction term: diagonal growth part plus coupling part.
#[inline]
pub fn jacobian<T: Real>(u: StatePoint<T>, p: &ModelParams<T>) -> Matrix2<T> {
    let two = T::one() + T::one();
    Matrix2::new(
        p.r * (T::one() - two * u.u1) + p.alpha1 * u.u2,
        p.alpha1 * u.u1,
        p.alpha2 * u.u2,
        T::one() - two * u.u2 + p.alpha2 * u.u1,
    )
}

/// Closed-form equilibria.
///
/// Only the singular case `r - alpha1 alpha2 <= 0` is rejected; the
/// remaining parameter conditions are left to [`ModelParams::assumption_ok`]
/// so that parameter sets such as `d < 1` can still be explored.
pub fn equilibria<T: Real>(p: &ModelParams<T>) -> Result<EquilibriumSet<T>> {
    let det = p.coexistence_det();
    if det <= T::zero() {
        return Err(Error::SingularEquilibrium {
            det: det.to_f64_lossy(),
        });
    }
    let z = T::zero();
    let o = T::one();
    Ok(EquilibriumSet {
        e1: StatePoint::new((p.r + p.alpha1) / det, p.r * (o + p.alpha2) / det),
        e2: StatePoint::new(z, o),
        e3: StatePoint::new(o, z),
        e4: StatePoint::new(z, z),
    })
}

/// Stable iff both Jacobian eigenvalues have real part below
/// `-STABILITY_TOL`.
pub fn classify_equilibrium<T: Real>(e: StatePoint<T>, p: &ModelParams<T>) -> Result<Stability> {
    let g = reaction(e, p);
    let scale = T::one() + e.norm_sqr();
    let tol = T::of(EQUILIBRIUM_TOL).max(T::of(1e3) * T::epsilon());
    if !(g.norm_inf() <= tol * scale) {
        return Err(Error::NotAnEquilibrium {
            u1: e.u1.to_f64_lossy(),
            u2: e.u2.to_f64_lossy(),
            residual: g.norm_inf().to_f64_lossy(),
        });
    }
    let lead = jacobian(e, p).max_real_eigenvalue();
    Ok(if lead < -T::of(STABILITY_TOL) {
        Stability::Stable
    } else {
        Stability::Unstable
    })
}

/// Exact quadratic remainder `g(ubar + v) - g(ubar) - J_g(ubar) v`.
///
/// The reaction term is quadratic, so the remainder does not depend on
/// `ubar`.
#[inline]
pub fn quadratic_remainder<T: Real>(
    _ubar: StatePoint<T>,
    v: StatePoint<T>,
    p: &ModelParams<T>,
) -> StatePoint<T> {
    StatePoint::new(
        -p.r * v.u1 * v.u1 + p.alpha1 * v.u1 * v.u2,
        -v.u2 * v.u2 + p.alpha2 * v.u1 * v.u2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> ModelParams<f64> {
        ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap()
    }

    #[test]
    fn reaction_examples() {
        let p = fig1();
        assert_eq!(reaction(StatePoint::new(0.0, 0.0), &p), StatePoint::zero());
        assert_eq!(reaction(StatePoint::new(1.0, 0.0), &p), StatePoint::zero());
        let g = reaction(StatePoint::new(1.0, 1.0), &p);
        assert_relative_eq!(g.u1, 0.75, epsilon = 1e-15);
        assert_relative_eq!(g.u2, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        let p = fig1();
        assert_eq!(jacobian(StatePoint::zero(), &p), Matrix2::diag(2.0, 1.0));
        let j3 = jacobian(StatePoint::new(1.0, 0.0), &p);
        assert_eq!(j3, Matrix2::new(-2.0, 0.75, 0.0, 1.75));
    }

    #[test]
    fn equilibria_closed_form() {
        let p = fig1();
        let eq = equilibria(&p).unwrap();
        // (r + a1)/(r - a1 a2) and r(1 + a2)/(r - a1 a2) with r - a1 a2 = 1.4375
        assert_relative_eq!(eq.e1.u1, 2.75 / 1.4375, max_relative = 1e-12);
        assert_relative_eq!(eq.e1.u2, 3.5 / 1.4375, max_relative = 1e-12);
        assert_relative_eq!(eq.e1.u1, 1.913_043_478_3, epsilon = 1e-10);
        assert_relative_eq!(eq.e1.u2, 2.434_782_608_7, epsilon = 1e-10);
        assert_eq!(eq.e2, StatePoint::new(0.0, 1.0));
        assert_eq!(eq.e3, StatePoint::new(1.0, 0.0));
        assert_eq!(eq.e4, StatePoint::new(0.0, 0.0));
    }

    #[test]
    fn singular_coexistence_rejected() {
        let p = ModelParams::new(4.0, 2.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            equilibria(&p),
            Err(Error::SingularEquilibrium { .. })
        ));
    }

    #[test]
    fn non_positive_parameter_rejected() {
        assert!(ModelParams::new(0.0, 2.0, 0.1, 0.1).is_err());
        assert!(ModelParams::new(4.0, f64::NAN, 0.1, 0.1).is_err());
    }

    #[test]
    fn classification_examples() {
        let p = fig1();
        let eq = equilibria(&p).unwrap();
        assert_eq!(classify_equilibrium(eq.e1, &p).unwrap(), Stability::Stable);
        assert_eq!(
            classify_equilibrium(eq.e4, &p).unwrap(),
            Stability::Unstable
        );
        let eig = jacobian(eq.e3, &p).eigenvalues();
        assert_relative_eq!(eig[0].re, 1.75, epsilon = 1e-14);
        assert_eq!(
            classify_equilibrium(eq.e3, &p).unwrap(),
            Stability::Unstable
        );
        assert!(matches!(
            classify_equilibrium(StatePoint::new(0.5, 0.5), &p),
            Err(Error::NotAnEquilibrium { .. })
        ));
    }

    #[test]
    fn matrix_exponential_matches_series() {
        let cases = [
            Matrix2::new(-0.3, 0.2, 0.1, 0.4),
            Matrix2::new(0.0, 1.0, -1.0, 0.0),
            Matrix2::new(0.1, 0.0, 0.0, 0.1),
            Matrix2::new(-2.0, 0.75, 0.0, 1.75),
        ];
        for a in cases {
            let mut term = Matrix2::identity();
            let mut sum = Matrix2::identity();
            for k in 1..40 {
                term = term.mul(&a).scale(1.0 / k as f64);
                sum = sum.add(&term);
            }
            let e = a.exp();
            assert_relative_eq!(e.a11, sum.a11, epsilon = 1e-12);
            assert_relative_eq!(e.a12, sum.a12, epsilon = 1e-12);
            assert_relative_eq!(e.a21, sum.a21, epsilon = 1e-12);
            assert_relative_eq!(e.a22, sum.a22, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadratic_remainder_examples() {
        let p = fig1();
        let e3 = StatePoint::new(1.0, 0.0);
        assert_eq!(
            quadratic_remainder(e3, StatePoint::zero(), &p),
            StatePoint::zero()
        );
        let eps = 1e-3;
        let v = StatePoint::new(0.0, eps);
        let direct = reaction(e3 + v, &p) - reaction(e3, &p) - jacobian(e3, &p).apply(v);
        let q = quadratic_remainder(e3, v, &p);
        assert_relative_eq!(q.u2, -eps * eps, max_relative = 1e-9);
        assert_relative_eq!(q.u2, direct.u2, epsilon = 1e-15);
        assert_relative_eq!(q.u1, direct.u1, epsilon = 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let p = ModelParams::new(4.0f32, 2.0, 0.75, 0.75).unwrap();
        let eq = equilibria(&p).unwrap();
        assert!(reaction(eq.e1, &p).norm_inf() < 1e-5);
        assert_eq!(classify_equilibrium(eq.e1, &p).unwrap(), Stability::Stable);
    }
}
