//! Traveling-front profiles on truncated domains and the two-front
//! superposition.

mod csv;
pub mod cutoff;
mod solver;

use crate::error::{invalid, Error, Result};
use crate::model::{equilibria, jacobian, reaction, Matrix2, ModelParams, StatePoint};
use crate::Real;

pub use cutoff::{cutoff_chi, cutoff_chi_prime, cutoff_chi_second};

/// Default lower bound on `psi2 - psi1`.
pub const DEFAULT_SEPARATION_FLOOR: f64 = 20.0;

/// Tolerance on step-to-step increases in the monotonicity check.
pub const MONOTONE_TOL: f64 = 1e-10;

/// Tolerance for endpoint samples versus the endpoint states.
pub const ENDPOINT_TOL: f64 = 1e-8;

/// Fraction of the grid excluded on each side when measuring residuals.
pub const BOUNDARY_LAYER: f64 = 0.1;

/// Uniform grid `start + i * step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid<T> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> UniformGrid<T> {
    /// `n` equally spaced points from `lo` to `hi` inclusive.
    pub fn spanning(lo: T, hi: T, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(
                "domain",
                format!("need finite lo < hi, got ({lo}, {hi})"),
            ));
        }
        if n < 5 {
            return Err(invalid(
                "N",
                format!("need at least 5 grid points, got {n}"),
            ));
        }
        Ok(Self {
            start: lo,
            step: (hi - lo) / T::of_usize(n - 1),
            len: n,
        })
    }

    /// `n` points on `[-l, l]`.
    pub fn symmetric(l: T, n: usize) -> Result<Self> {
        if !(l.is_finite() && l > T::zero()) {
            return Err(invalid(
                "L",
                format!("half-width must be finite and > 0, got {l}"),
            ));
        }
        if n < 5 {
            return Err(invalid(
                "N",
                format!("need at least 5 grid points, got {n}"),
            ));
        }
        Ok(Self {
            start: -l,
            step: (l + l) / T::of_usize(n - 1),
            len: n,
        })
    }

    #[inline]
    pub fn point(&self, i: usize) -> T {
        self.start + self.step * T::of_usize(i)
    }

    pub fn end(&self) -> T {
        self.point(self.len - 1)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// Cell index `i` and fraction `theta in [0, 1]` with
    /// `x = point(i) + theta * step`; `None` outside the grid.
    #[inline]
    pub fn locate(&self, x: T) -> Option<(usize, T)> {
        let pos = (x - self.start) / self.step;
        if !(pos >= T::zero()) || pos > T::of_usize(self.len - 1) {
            return None;
        }
        let i = pos.floor().to_usize().unwrap_or(0).min(self.len - 2);
        Some((i, pos - T::of_usize(i)))
    }
}

/// The equation a profile solves: the scalar KPP equation (stored in the
/// first component) or the coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrontModel<T> {
    Kpp { d: T, r: T },
    System(ModelParams<T>),
}

impl<T: Real> FrontModel<T> {
    pub fn diffusion(&self) -> [T; 2] {
        match self {
            FrontModel::Kpp { d, .. } => [*d, T::one()],
            FrontModel::System(p) => p.diffusion(),
        }
    }

    pub fn reaction(&self, u: StatePoint<T>) -> StatePoint<T> {
        match self {
            FrontModel::Kpp { r, .. } => StatePoint::new(*r * u.u1 * (T::one() - u.u1), T::zero()),
            FrontModel::System(p) => reaction(u, p),
        }
    }

    pub fn jacobian(&self, u: StatePoint<T>) -> Matrix2<T> {
        match self {
            FrontModel::Kpp { r, .. } => Matrix2::diag(*r * (T::one() - (u.u1 + u.u1)), T::zero()),
            FrontModel::System(p) => jacobian(u, p),
        }
    }
}

/// Endpoint equilibria of a front, left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoints {
    E1E3,
    E1E4,
    E3E4,
}

impl Endpoints {
    pub fn label(self) -> &'static str {
        match self {
            Endpoints::E1E3 => "e1-e3",
            Endpoints::E1E4 => "e1-e4",
            Endpoints::E3E4 => "e3-e4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['_', '>', ' '], "-")
            .as_str()
        {
            "e1-e3" | "e1--e3" => Ok(Endpoints::E1E3),
            "e1-e4" | "e1--e4" => Ok(Endpoints::E1E4),
            "e3-e4" | "e3--e4" => Ok(Endpoints::E3E4),
            other => Err(Error::UnsupportedEndpoints(other.to_string())),
        }
    }
}

/// How the residual `D p'' + c p' + g(p)` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// The second-order stencil of the solver; measures algebraic accuracy.
    Discrete,
    /// A fourth-order stencil; measures the distance to the continuum
    /// equation, dominated by the truncation error of the solver.
    Truncation,
}

/// A sampled traveling-wave profile `p(xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontProfile<T> {
    pub speed: T,
    pub grid: UniformGrid<T>,
    pub values: Vec<StatePoint<T>>,
    pub left_state: StatePoint<T>,
    pub right_state: StatePoint<T>,
    pub endpoints: Endpoints,
    pub model: FrontModel<T>,
    /// Exponential decay rate of the slowest component toward the right
    /// state.
    pub tail_rate: Option<T>,
    /// Largest `xi` such that every sample left of it is component-wise
    /// `>= (1, 1)`; only set for `e1 -> e3` fronts.
    pub plateau_edge: Option<T>,
}

impl<T: Real> FrontProfile<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn xi(&self, i: usize) -> T {
        self.grid.point(i)
    }

    /// Linear interpolation; constant endpoint states outside the grid.
    pub fn eval(&self, xi: T) -> StatePoint<T> {
        match self.grid.locate(xi) {
            Some((i, th)) => self.values[i] * (T::one() - th) + self.values[i + 1] * th,
            None => {
                if xi < self.grid.start {
                    self.left_state
                } else {
                    self.right_state
                }
            }
        }
    }

    fn node_derivatives(&self, i: usize) -> (StatePoint<T>, StatePoint<T>) {
        let n = self.values.len();
        if i == 0 || i + 1 >= n {
            return (StatePoint::zero(), StatePoint::zero());
        }
        let h = self.grid.step;
        let (a, b, c) = (self.values[i - 1], self.values[i], self.values[i + 1]);
        (
            (c - a) * (T::of(0.5) / h),
            (c - b - b + a) * (T::one() / (h * h)),
        )
    }

    /// `(p, p', p'')` with nodal central differences interpolated linearly.
    pub fn eval_jet(&self, xi: T) -> [StatePoint<T>; 3] {
        match self.grid.locate(xi) {
            Some((i, th)) => {
                let (d1a, d2a) = self.node_derivatives(i);
                let (d1b, d2b) = self.node_derivatives(i + 1);
                let w0 = T::one() - th;
                [
                    self.values[i] * w0 + self.values[i + 1] * th,
                    d1a * w0 + d1b * th,
                    d2a * w0 + d2b * th,
                ]
            }
            None => {
                let s = if xi < self.grid.start {
                    self.left_state
                } else {
                    self.right_state
                };
                [s, StatePoint::zero(), StatePoint::zero()]
            }
        }
    }

    /// The profile `q(xi) = p(xi - delta)`.
    pub fn translated(&self, delta: T) -> Self {
        let mut out = self.clone();
        out.grid.start += delta;
        out.plateau_edge = out.plateau_edge.map(|x| x + delta);
        out
    }

    /// Position where the first component crosses the midpoint of its
    /// endpoint values, by linear interpolation between samples.
    pub fn midpoint_crossing(&self) -> Result<T> {
        let level = (self.left_state.u1 + self.right_state.u1) * T::of(0.5);
        self.level_crossing(0, level)
    }

    /// First position where `component` crosses `level`, scanning from the
    /// left, by linear interpolation between samples.
    pub fn level_crossing(&self, component: usize, level: T) -> Result<T> {
        for i in 0..self.values.len().saturating_sub(1) {
            let a = self.values[i].get(component) - level;
            let b = self.values[i + 1].get(component) - level;
            if a == T::zero() {
                return Ok(self.xi(i));
            }
            if a * b < T::zero() {
                let th = a / (a - b);
                return Ok(self.xi(i) + th * self.grid.step);
            }
        }
        if let Some(last) = self.values.last() {
            if last.get(component) == level {
                return Ok(self.grid.end());
            }
        }
        Err(Error::NoCrossing {
            level: level.to_f64_lossy(),
        })
    }

    /// Residual `D p'' + c p' + g(p)` at every sample; entries where the
    /// stencil does not fit are zero.
    pub fn residual(&self, kind: ResidualKind) -> Vec<StatePoint<T>> {
        residual_with(
            &self.values,
            self.grid.step,
            self.speed,
            |u| self.model.reaction(u),
            self.model.diffusion(),
            kind,
        )
    }

    /// Residual of the coupled system `D p'' + c p' + g(p)` for the given
    /// parameters, regardless of which equation produced the profile.
    pub fn system_residual(&self, p: &ModelParams<T>, kind: ResidualKind) -> Vec<StatePoint<T>> {
        residual_with(
            &self.values,
            self.grid.step,
            self.speed,
            |u| reaction(u, p),
            p.diffusion(),
            kind,
        )
    }

    /// Sup-norm of [`FrontProfile::residual`] over the samples that are
    /// not within `BOUNDARY_LAYER` of either end.
    pub fn interior_residual(&self, kind: ResidualKind) -> T {
        let res = self.residual(kind);
        let n = res.len();
        let skip = ((n as f64) * BOUNDARY_LAYER).ceil() as usize;
        res[skip.max(2)..n.saturating_sub(skip.max(2))]
            .iter()
            .map(|v| v.norm_inf())
            .fold(T::zero(), T::max)
    }

    /// Largest step-to-step increase of `component` and where it occurs.
    pub fn max_increase(&self, component: usize) -> (T, T) {
        let mut worst = T::neg_infinity();
        let mut at = self.grid.start;
        for i in 0..self.values.len().saturating_sub(1) {
            let inc = self.values[i + 1].get(component) - self.values[i].get(component);
            if inc > worst {
                worst = inc;
                at = self.xi(i);
            }
        }
        (worst, at)
    }

    pub fn check_monotone(&self, component: usize) -> Result<()> {
        let (inc, at) = self.max_increase(component);
        if inc > T::of(MONOTONE_TOL) {
            return Err(Error::Monotonicity {
                component,
                violation: inc.to_f64_lossy(),
                xi: at.to_f64_lossy(),
            });
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        csv::write_profile(self)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        csv::read_profile(text)
    }
}

fn residual_with<T: Real>(
    u: &[StatePoint<T>],
    h: T,
    c: T,
    g: impl Fn(StatePoint<T>) -> StatePoint<T>,
    diff: [T; 2],
    kind: ResidualKind,
) -> Vec<StatePoint<T>> {
    let n = u.len();
    let mut out = vec![StatePoint::zero(); n];
    let dmat = StatePoint::new(diff[0], diff[1]);
    match kind {
        ResidualKind::Discrete => {
            let inv_h2 = T::one() / (h * h);
            let half_h = T::of(0.5) / h;
            for i in 1..n.saturating_sub(1) {
                let d2 = (u[i + 1] - u[i] - u[i] + u[i - 1]) * inv_h2;
                let d1 = (u[i + 1] - u[i - 1]) * half_h;
                out[i] = d2.hadamard(dmat) + d1 * c + g(u[i]);
            }
        }
        ResidualKind::Truncation => {
            let k1 = T::one() / (T::of(12.0) * h);
            let k2 = T::one() / (T::of(12.0) * h * h);
            for i in 2..n.saturating_sub(2) {
                let d1 = (u[i - 2] - u[i + 2] + (u[i + 1] - u[i - 1]) * T::of(8.0)) * k1;
                let d2 = ((u[i + 1] + u[i - 1]) * T::of(16.0)
                    - u[i + 2]
                    - u[i - 2]
                    - u[i] * T::of(30.0))
                    * k2;
                out[i] = d2.hadamard(dmat) + d1 * c + g(u[i]);
            }
        }
    }
    out
}

/// Minimal KPP speed `2 sqrt(d r)`.
pub fn kpp_minimal_speed<T: Real>(d: T, r: T) -> T {
    (T::of(4.0) * d * r).sqrt()
}

/// Slow decay root `(c - sqrt(c^2 - 4 d r)) / (2 d)` of `d k^2 - c k + r`.
pub fn kpp_slow_rate<T: Real>(c: T, d: T, r: T) -> T {
    let disc = (c * c - T::of(4.0) * d * r).max(T::zero());
    (c - disc.sqrt()) / (d + d)
}

/// Scalar KPP front `d p'' + c p' + r p (1 - p) = 0` from 1 to 0 on `n`
/// points of `[-l, l]`, normalized to cross 1/2 at the origin.
pub fn kpp_profile<T: Real>(c: T, d: T, r: T, l: T, n: usize) -> Result<FrontProfile<T>> {
    for (name, v) in [("d", d), ("r", r), ("c", c)] {
        if !(v.is_finite() && v > T::zero()) {
            return Err(invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let minimal = kpp_minimal_speed(d, r);
    if c < minimal {
        return Err(Error::SpeedBelowMinimal {
            speed: c.to_f64_lossy(),
            minimal: minimal.to_f64_lossy(),
        });
    }
    let grid = UniformGrid::symmetric(l, n)?;
    let model = FrontModel::Kpp { d, r };
    let left = StatePoint::new(T::one(), T::zero());
    let right = StatePoint::zero();
    let sol = solver::solve(&model, c, left, right, grid, [false, true])?;
    let mut prof = FrontProfile {
        speed: c,
        grid,
        values: sol.values,
        left_state: left,
        right_state: right,
        endpoints: Endpoints::E3E4,
        model,
        tail_rate: None,
        plateau_edge: None,
    };
    prof.check_monotone(0)?;
    prof.tail_rate = fit_tail(&prof, sol.free_component);
    Ok(prof)
}

/// Front of the coupled system between the given equilibria.
///
/// `lower_bound` is an optional caller-supplied minimal speed. The linear
/// spreading speed `2 sqrt(D_k J_kk)` of every unstable component at the
/// right state is always enforced.
pub fn system_front<T: Real>(
    c: T,
    p: &ModelParams<T>,
    ends: Endpoints,
    lower_bound: Option<T>,
    l: T,
    n: usize,
) -> Result<FrontProfile<T>> {
    if !p.assumption_ok() {
        return Err(invalid(
            "params",
            "front computation requires d > 1, r > 1 and r - alpha1 alpha2 > 0",
        ));
    }
    if !(c.is_finite() && c > T::zero()) {
        return Err(invalid("c", format!("must be finite and > 0, got {c}")));
    }
    if let Some(lb) = lower_bound {
        if c < lb {
            return Err(Error::SpeedBelowMinimal {
                speed: c.to_f64_lossy(),
                minimal: lb.to_f64_lossy(),
            });
        }
    }
    let eq = equilibria(p)?;
    let (left, right) = match ends {
        Endpoints::E1E3 => (eq.e1, eq.e3),
        Endpoints::E1E4 => (eq.e1, eq.e4),
        Endpoints::E3E4 => {
            return Err(Error::UnsupportedEndpoints(
                "e3 -> e4 is the scalar KPP front; use kpp_profile".into(),
            ))
        }
    };
    let model = FrontModel::System(*p);
    let jr = jacobian(right, p).diagonal();
    let diff = p.diffusion();
    let mut minimal = T::zero();
    for k in 0..2 {
        if jr[k] > T::zero() {
            minimal = minimal.max((T::of(4.0) * diff[k] * jr[k]).sqrt());
        }
    }
    if c < minimal {
        return Err(Error::SpeedBelowMinimal {
            speed: c.to_f64_lossy(),
            minimal: minimal.to_f64_lossy(),
        });
    }
    let grid = UniformGrid::symmetric(l, n)?;
    let sol = solver::solve(&model, c, left, right, grid, [false, false])?;
    let mut prof = FrontProfile {
        speed: c,
        grid,
        values: sol.values,
        left_state: left,
        right_state: right,
        endpoints: ends,
        model,
        tail_rate: None,
        plateau_edge: None,
    };
    prof.check_monotone(0)?;
    prof.check_monotone(1)?;
    prof.tail_rate = fit_tail(&prof, sol.free_component);
    if ends == Endpoints::E1E3 {
        prof.plateau_edge = Some(plateau_edge(&prof)?);
    }
    Ok(prof)
}

fn plateau_edge<T: Real>(p: &FrontProfile<T>) -> Result<T> {
    let floor = T::one() - T::of(MONOTONE_TOL);
    let mut last = None;
    for (i, v) in p.values.iter().enumerate() {
        if v.u1 >= floor && v.u2 >= floor {
            last = Some(i);
        } else {
            break;
        }
    }
    match last {
        Some(i) if i > 0 => Ok(p.xi(i)),
        _ => Err(Error::BelowUnity {
            xi: p.xi(0).to_f64_lossy(),
        }),
    }
}

/// Least-squares slope of `log |u_k - right_k|` over the samples where
/// the deviation lies in `[1e-12, 1e-5]`, away from the right boundary
/// layer.
fn fit_tail<T: Real>(p: &FrontProfile<T>, k: usize) -> Option<T> {
    let n = p.values.len();
    let cut = n - ((n as f64) * BOUNDARY_LAYER).ceil() as usize;
    let right = p.right_state.get(k);
    let scale = (p.left_state.get(k) - right).abs().max(T::of(1e-300));
    let (lo, hi) = (T::of(1e-12) * scale, T::of(1e-5) * scale);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..cut {
        let dev = (p.values[i].get(k) - right).abs();
        if dev >= lo && dev <= hi {
            xs.push(p.xi(i));
            ys.push(dev.ln());
        }
    }
    let (slope, _, _) = linear_fit(&xs, &ys)?;
    Some(-slope)
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, r^2)`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Option<(T, T, T)> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return None;
    }
    let nf = T::of_usize(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (*x - mx, *y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy <= T::zero() {
        T::one()
    } else {
        (sxy * sxy / (sxx * syy)).min(T::one())
    };
    Some((slope, my - slope * mx, r2))
}

/// Re-pins a profile so that its first component crosses the midpoint of
/// its endpoint values at `xi = 0`; returns the profile and the applied
/// shift.
pub fn normalize_translation<T: Real>(f: &FrontProfile<T>) -> Result<(FrontProfile<T>, T)> {
    let x0 = f.midpoint_crossing()?;
    let shift = -x0;
    Ok((f.translated(shift), shift))
}

/// The two-front superposition: `p1` on the left moving at `c1`, `p2` on
/// the right moving at `c2`, glued by the cutoff centered at `c0 t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionSpec<T> {
    pub p1: FrontProfile<T>,
    pub p2: FrontProfile<T>,
    pub c1: T,
    pub c2: T,
    pub c0: T,
    pub psi1: T,
    pub psi2: T,
}

/// `ubar` and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionJet<T> {
    pub u: StatePoint<T>,
    pub u_x: StatePoint<T>,
    pub u_xx: StatePoint<T>,
    pub u_t: StatePoint<T>,
}

impl<T: Real> SuperpositionSpec<T> {
    pub fn new(p1: FrontProfile<T>, p2: FrontProfile<T>, psi1: T, psi2: T) -> Result<Self> {
        Self::with_floor(p1, p2, psi1, psi2, T::of(DEFAULT_SEPARATION_FLOOR))
    }

    pub fn with_floor(
        p1: FrontProfile<T>,
        p2: FrontProfile<T>,
        psi1: T,
        psi2: T,
        floor: T,
    ) -> Result<Self> {
        let (c1, c2) = (p1.speed, p2.speed);
        if !(c1 < c2) {
            return Err(invalid(
                "c1",
                format!("need c1 < c2, got c1 = {c1}, c2 = {c2}"),
            ));
        }
        if !(psi1 < T::zero() && T::zero() < psi2) {
            return Err(invalid(
                "psi",
                format!("need psi1 < 0 < psi2, got ({psi1}, {psi2})"),
            ));
        }
        if psi2 - psi1 < floor {
            return Err(invalid(
                "psi",
                format!(
                    "separation psi2 - psi1 = {} is below the floor {floor}",
                    psi2 - psi1
                ),
            ));
        }
        Ok(Self {
            c0: (c1 + c2) * T::of(0.5),
            p1,
            p2,
            c1,
            c2,
            psi1,
            psi2,
        })
    }

    /// `y1 = x - c1 t - psi1` and `y2 = x - c2 t - psi2`.
    #[inline]
    pub fn moving_coordinates(&self, t: T, x: T) -> (T, T) {
        (x - self.c1 * t - self.psi1, x - self.c2 * t - self.psi2)
    }

    pub fn eval(&self, t: T, x: T) -> StatePoint<T> {
        let (y1, y2) = self.moving_coordinates(t, x);
        let z = x - self.c0 * t;
        if z <= -T::one() {
            return self.p1.eval(y1);
        }
        if z >= T::one() {
            return self.p2.eval(y2);
        }
        let chi = cutoff_chi(z);
        self.p1.eval(y1) * (T::one() - chi) + self.p2.eval(y2) * chi
    }

    pub fn jet(&self, t: T, x: T) -> SuperpositionJet<T> {
        let (y1, y2) = self.moving_coordinates(t, x);
        let z = x - self.c0 * t;
        let [a, a1, a2] = self.p1.eval_jet(y1);
        let [b, b1, b2] = self.p2.eval_jet(y2);
        let (chi, dchi, ddchi) = (cutoff_chi(z), cutoff_chi_prime(z), cutoff_chi_second(z));
        let one_m = T::one() - chi;
        let two = T::of(2.0);
        SuperpositionJet {
            u: a * one_m + b * chi,
            u_x: (b - a) * dchi + a1 * one_m + b1 * chi,
            u_xx: (b - a) * ddchi + (b1 - a1) * (two * dchi) + a2 * one_m + b2 * chi,
            u_t: (a - b) * (self.c0 * dchi) - a1 * (self.c1 * one_m) - b1 * (self.c2 * chi),
        }
    }
}

/// `ubar(t, x)`.
pub fn superpose<T: Real>(spec: &SuperpositionSpec<T>, t: T, x: T) -> StatePoint<T> {
    spec.eval(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kpp6() -> FrontProfile<f64> {
        kpp_profile(6.0, 4.0, 2.0, 100.0, 4000).unwrap()
    }

    #[test]
    fn kpp_rejects_slow_speed() {
        let err = kpp_profile(5.0, 4.0, 2.0, 100.0, 400).unwrap_err();
        match err {
            Error::SpeedBelowMinimal { minimal, .. } => {
                assert!((minimal - 8f64.sqrt() * 2.0).abs() < 1e-12)
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn kpp_tail_rate_is_slow_root() {
        let p = kpp6();
        let rate = p.tail_rate.unwrap();
        assert!((rate - 0.5).abs() < 0.025, "rate {rate}");
        assert!((p.values[0].u1 - 1.0).abs() < ENDPOINT_TOL);
        assert!(p.values.last().unwrap().u1.abs() < ENDPOINT_TOL);
        assert!(p.values.iter().all(|v| v.u2 == 0.0));
        assert!(p.interior_residual(ResidualKind::Discrete) < 1e-6);
    }

    #[test]
    fn kpp_normalized_midpoint() {
        let (q, shift) = normalize_translation(&kpp6()).unwrap();
        assert!(shift.abs() < q.grid.step);
        assert!((q.eval(0.0).u1 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn normalize_recovers_shift() {
        let p = kpp6();
        let moved = p.translated(3.0);
        let (_, shift) = normalize_translation(&moved).unwrap();
        let (_, base) = normalize_translation(&p).unwrap();
        assert!((shift - base + 3.0).abs() < p.grid.step);
        let (again, s2) = normalize_translation(&normalize_translation(&p).unwrap().0).unwrap();
        assert!(s2.abs() < 1e-12);
        assert_eq!(again.values, p.values);
    }

    #[test]
    fn system_front_e1e3() {
        let p = ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap();
        let f = system_front(3.0, &p, Endpoints::E1E3, None, 100.0, 4000).unwrap();
        assert!(f.interior_residual(ResidualKind::Discrete) < 1e-6);
        f.check_monotone(0).unwrap();
        f.check_monotone(1).unwrap();
        let edge = f.plateau_edge.unwrap();
        for (i, v) in f.values.iter().enumerate() {
            if f.xi(i) <= edge {
                assert!(v.u1 >= 1.0 - 1e-10 && v.u2 >= 1.0 - 1e-10);
            }
        }
        assert!((f.values[0] - f.left_state).norm_inf() < ENDPOINT_TOL);
        assert!((*f.values.last().unwrap() - f.right_state).norm_inf() < ENDPOINT_TOL);
    }

    #[test]
    fn superposition_branches() {
        let p = ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap();
        let p1 = system_front(3.0, &p, Endpoints::E1E3, None, 60.0, 1201).unwrap();
        let p2 = kpp_profile(6.0, 4.0, 2.0, 60.0, 1201).unwrap();
        let spec = SuperpositionSpec::new(p1.clone(), p2.clone(), -10.0, 10.0).unwrap();
        let t = 0.7;
        let x = spec.c0 * t - 1.5;
        assert_eq!(superpose(&spec, t, x), p1.eval(x - 3.0 * t + 10.0));
        let x = spec.c0 * t + 1.0;
        assert_eq!(superpose(&spec, t, x), p2.eval(x - 6.0 * t - 10.0));
        let eq = equilibria(&p).unwrap();
        assert!((superpose(&spec, 0.0, -1e3) - eq.e1).norm_inf() < 1e-12);
        assert!(superpose(&spec, 0.0, 1e3).norm_inf() < 1e-12);
    }

    #[test]
    fn superposition_rejects_bad_specs() {
        let a = kpp_profile(6.0, 4.0, 2.0, 40.0, 401).unwrap();
        let b = kpp_profile(7.0, 4.0, 2.0, 40.0, 401).unwrap();
        assert!(SuperpositionSpec::new(b.clone(), a.clone(), -10.0, 10.0).is_err());
        assert!(SuperpositionSpec::new(a.clone(), b.clone(), -5.0, 5.0).is_err());
        assert!(SuperpositionSpec::new(a.clone(), b.clone(), 1.0, 30.0).is_err());
        assert!(SuperpositionSpec::with_floor(a, b, -5.0, 5.0, 10.0).is_ok());
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = ModelParams::new(4.0, 2.0, 0.75, 0.75).unwrap();
        let p1 = system_front(3.0, &p, Endpoints::E1E3, None, 60.0, 6001).unwrap();
        let p2 = kpp_profile(6.0, 4.0, 2.0, 60.0, 6001).unwrap();
        let spec = SuperpositionSpec::new(p1, p2, -10.0, 10.0).unwrap();
        let (t, h) = (0.3, 1e-3);
        for &x in &[-12.0, -0.4, 1.6, 0.9, 11.0] {
            let j = spec.jet(t, x);
            let ux = (spec.eval(t, x + h) - spec.eval(t, x - h)) * (0.5 / h);
            let ut = (spec.eval(t + h, x) - spec.eval(t - h, x)) * (0.5 / h);
            assert!(
                (j.u_x - ux).norm_inf() < 2e-3,
                "x={x}: {:?} vs {:?}",
                j.u_x,
                ux
            );
            assert!(
                (j.u_t - ut).norm_inf() < 2e-2,
                "x={x}: {:?} vs {:?}",
                j.u_t,
                ut
            );
        }
    }
}
