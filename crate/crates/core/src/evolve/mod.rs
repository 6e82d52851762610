//! Time integration of the nonlinear system, its linearization at the
//! superposition and the weighted linear dynamics.
//!
//! One step is a symmetric splitting: half a reaction step, a full
//! diffusion step, half a reaction step. Diffusion is Crank-Nicolson
//! (tridiagonal solves per component); the reaction is integrated pointwise
//! with classical Runge-Kutta.
//!
//! In weighted mode the diffusion stencil is the exact conjugate
//! `omega^{-1} Delta_h omega` of the unweighted one, which contains the
//! `2 D phi_x w_x` and `D (phi_xx + phi_x^2)` terms, and the `-phi_t`
//! potential is integrated exactly as the factor `omega(t_a) / omega(t_b)`.
//! A weighted run therefore reproduces the unweighted run divided by
//! `omega` up to rounding.

mod field;
mod presets;
mod residual;

pub use field::{level_crossing_from_right, SpaceTimeField};
pub use presets::{
    figure_checks, FigureCheck, Preset, FIGURE_TRANSIENT, INTERFACE_MERGE_WIDTH, SEPARATION_SLACK,
};
pub use residual::{decay_fit, residual_field, weighted_residual_sup, DecayFit, ResidualVariant};

use crate::error::{invalid, Error, Result};
use crate::fronts::{SuperpositionSpec, UniformGrid};
use crate::linalg::Tridiagonal;
use crate::model::{jacobian, reaction, Matrix2, ModelParams, StatePoint};
use crate::weights::WeightSpec;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nonlinear,
    LinearAtAnsatz,
    WeightedLinear,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Nonlinear => "nonlinear",
            Mode::LinearAtAnsatz => "linear_at_ansatz",
            Mode::WeightedLinear => "weighted_linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "nonlinear" => Ok(Mode::Nonlinear),
            "linear_at_ansatz" | "linear" => Ok(Mode::LinearAtAnsatz),
            "weighted_linear" | "weighted" => Ok(Mode::WeightedLinear),
            other => Err(invalid("mode", format!("unknown mode `{other}`"))),
        }
    }

    /// Zero flux for the nonlinear system, homogeneous Dirichlet for the
    /// perturbation equations.
    pub fn dirichlet(self) -> bool {
        self != Mode::Nonlinear
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffusionScheme {
    #[default]
    CrankNicolson,
    /// Forward Euler diffusion; requires `dt <= 0.25 dx^2 / max(d, 1)`.
    Explicit,
}

/// `amplitude * exp(-((x - center) / width)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump<T> {
    pub center: T,
    pub width: T,
    pub amplitude: StatePoint<T>,
}

impl<T: Real> Bump<T> {
    pub fn eval(&self, x: T) -> StatePoint<T> {
        let s = (x - self.center) / self.width;
        self.amplitude * (-s * s).exp()
    }
}

/// Constant `state` on the open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub lo: T,
    pub hi: T,
    pub state: StatePoint<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<T> {
    Uniform(StatePoint<T>),
    /// Piecewise constant data, later segments overriding earlier ones,
    /// plus additive bumps.
    Steps {
        background: StatePoint<T>,
        segments: Vec<Segment<T>>,
        bumps: Vec<Bump<T>>,
    },
    /// Sum of bumps, optionally rescaled to unit L2 norm.
    Bumps {
        bumps: Vec<Bump<T>>,
        normalize: bool,
    },
    Samples(Vec<StatePoint<T>>),
}

impl<T: Real> InitialCondition<T> {
    pub fn sample(&self, grid: &UniformGrid<T>) -> Result<Vec<StatePoint<T>>> {
        let xs = grid.points();
        let out = match self {
            InitialCondition::Uniform(s) => vec![*s; xs.len()],
            InitialCondition::Steps {
                background,
                segments,
                bumps,
            } => xs
                .iter()
                .map(|&x| {
                    let mut u = *background;
                    for seg in segments {
                        if seg.lo < x && x < seg.hi {
                            u = seg.state;
                        }
                    }
                    bumps.iter().fold(u, |acc, b| acc + b.eval(x))
                })
                .collect(),
            InitialCondition::Bumps { bumps, normalize } => {
                let mut u: Vec<StatePoint<T>> = xs
                    .iter()
                    .map(|&x| {
                        bumps
                            .iter()
                            .fold(StatePoint::zero(), |acc, b| acc + b.eval(x))
                    })
                    .collect();
                if *normalize {
                    let n = l2_norm(&u, grid.step);
                    if !(n > T::zero()) {
                        return Err(invalid("initial", "bumps vanish on the grid"));
                    }
                    for v in &mut u {
                        *v = *v * n.recip();
                    }
                }
                u
            }
            InitialCondition::Samples(v) => {
                if v.len() != xs.len() {
                    return Err(Error::Mismatch(format!(
                        "{} samples for {} grid points",
                        v.len(),
                        xs.len()
                    )));
                }
                v.clone()
            }
        };
        Ok(out)
    }
}

/// Trapezoid L2 norm of a grid function, both components.
pub fn l2_norm<T: Real>(u: &[StatePoint<T>], dx: T) -> T {
    let n = u.len();
    let mut s = T::zero();
    for (i, v) in u.iter().enumerate() {
        let w = if i == 0 || i + 1 == n {
            T::of(0.5)
        } else {
            T::one()
        };
        s += w * v.norm_sqr();
    }
    (s * dx).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T> {
    pub params: ModelParams<T>,
    pub mode: Mode,
    /// Required by the linear modes.
    pub spec: Option<SuperpositionSpec<T>>,
    /// Required by the weighted mode.
    pub weight: Option<WeightSpec<T>>,
    pub initial: InitialCondition<T>,
    pub domain: UniformGrid<T>,
    pub t_end: T,
    /// Upper bound for the step; shrunk so that `t_end` is hit exactly.
    pub dt: T,
    /// Store a snapshot every this many steps (and at `t = 0`, `t_end`).
    pub snapshot_every: usize,
    pub scheme: DiffusionScheme,
    /// Initial steps with backward Euler diffusion, damping the
    /// non-smooth modes of step data.
    pub smoothing_steps: usize,
}

impl<T: Real> ScenarioConfig<T> {
    pub fn new(
        params: ModelParams<T>,
        mode: Mode,
        initial: InitialCondition<T>,
        domain: UniformGrid<T>,
        t_end: T,
        dt: T,
    ) -> Self {
        Self {
            params,
            mode,
            spec: None,
            weight: None,
            initial,
            domain,
            t_end,
            dt,
            snapshot_every: 1,
            scheme: DiffusionScheme::default(),
            smoothing_steps: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(invalid("dt", "time step must be positive"));
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return Err(invalid("t_end", "final time must be >= 0"));
        }
        if self.snapshot_every == 0 {
            return Err(invalid("snapshot_every", "must be at least 1"));
        }
        if self.mode != Mode::Nonlinear && self.spec.is_none() {
            return Err(invalid(
                "spec",
                format!("{} mode needs a superposition", self.mode.label()),
            ));
        }
        if self.mode == Mode::WeightedLinear {
            let (Some(w), Some(s)) = (&self.weight, &self.spec) else {
                return Err(invalid("weight", "weighted mode needs a weight"));
            };
            w.check_consistent(s)?;
        }
        if self.scheme == DiffusionScheme::Explicit {
            let h = self.domain.step;
            let bound = T::of(0.25) * h * h / self.params.d.max(T::one());
            if self.dt > bound {
                return Err(Error::StepTooLarge {
                    dt: self.dt.to_f64_lossy(),
                    bound: bound.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// Number of steps and the step actually used.
    pub fn steps(&self) -> (usize, T) {
        if self.t_end == T::zero() {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - T::of(1e-9))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(1);
        (n, self.t_end / T::of_usize(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub t: T,
    pub u: Vec<StatePoint<T>>,
    pub steps_taken: usize,
}

/// Stepping machinery for one configuration.
pub struct Integrator<'a, T> {
    cfg: &'a ScenarioConfig<T>,
    x: Vec<T>,
    tri: Tridiagonal<T>,
    rhs: Vec<T>,
    work: Vec<T>,
    scratch: Vec<T>,
    jac: [Vec<Matrix2<T>>; 3],
    phi_a: Vec<T>,
}

impl<'a, T: Real> Integrator<'a, T> {
    pub fn new(cfg: &'a ScenarioConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.domain.len;
        Ok(Self {
            cfg,
            x: cfg.domain.points(),
            tri: Tridiagonal::zeros(n),
            rhs: vec![T::zero(); n],
            work: vec![T::zero(); n],
            scratch: Vec::with_capacity(n),
            jac: [Vec::new(), Vec::new(), Vec::new()],
            phi_a: vec![T::zero(); n],
        })
    }

    pub fn initial_state(&self) -> Result<State<T>> {
        let mut u = self.cfg.initial.sample(&self.cfg.domain)?;
        if self.cfg.mode.dirichlet() {
            let n = u.len();
            u[0] = StatePoint::zero();
            u[n - 1] = StatePoint::zero();
        }
        Ok(State {
            t: T::zero(),
            u,
            steps_taken: 0,
        })
    }

    /// Advances `state` by `dt`.
    pub fn step(&mut self, state: &mut State<T>, dt: T) -> Result<()> {
        let half = dt * T::of(0.5);
        let t = state.t;
        self.reaction(&mut state.u, t, half);
        let theta = if self.cfg.scheme == DiffusionScheme::Explicit {
            T::zero()
        } else if state.steps_taken < self.cfg.smoothing_steps {
            T::one()
        } else {
            T::of(0.5)
        };
        self.diffusion(&mut state.u, t + half, dt, theta)?;
        self.reaction(&mut state.u, t + half, half);
        state.t = t + dt;
        state.steps_taken += 1;
        if let Some(i) = state.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                t: state.t.to_f64_lossy(),
                x: self.x[i].to_f64_lossy(),
            });
        }
        Ok(())
    }

    fn fill_jacobians(&mut self, slot: usize, t: T) {
        let spec = self.cfg.spec.as_ref().expect("validated");
        let p = &self.cfg.params;
        let v = &mut self.jac[slot];
        v.clear();
        v.extend(self.x.iter().map(|&x| jacobian(spec.eval(t, x), p)));
    }

    fn reaction(&mut self, u: &mut [StatePoint<T>], a: T, h: T) {
        let p = self.cfg.params;
        let h2 = h * T::of(0.5);
        let sixth = h / T::of(6.0);
        let two = T::of(2.0);
        match self.cfg.mode {
            Mode::Nonlinear => {
                for v in u.iter_mut() {
                    let k1 = reaction(*v, &p);
                    let k2 = reaction(*v + k1 * h2, &p);
                    let k3 = reaction(*v + k2 * h2, &p);
                    let k4 = reaction(*v + k3 * h, &p);
                    *v = *v + (k1 + k2 * two + k3 * two + k4) * sixth;
                }
            }
            Mode::LinearAtAnsatz | Mode::WeightedLinear => {
                self.fill_jacobians(0, a);
                self.fill_jacobians(1, a + h2);
                self.fill_jacobians(2, a + h);
                let weighted = self.cfg.mode == Mode::WeightedLinear;
                if weighted {
                    let w = self.cfg.weight.as_ref().expect("validated");
                    for (f, &x) in self.phi_a.iter_mut().zip(&self.x) {
                        *f = w.phi(a, x).value;
                    }
                }
                for (i, v) in u.iter_mut().enumerate() {
                    let (j0, j1, j2) = (&self.jac[0][i], &self.jac[1][i], &self.jac[2][i]);
                    let k1 = j0.apply(*v);
                    let k2 = j1.apply(*v + k1 * h2);
                    let k3 = j1.apply(*v + k2 * h2);
                    let k4 = j2.apply(*v + k3 * h);
                    *v = *v + (k1 + k2 * two + k3 * two + k4) * sixth;
                }
                if weighted {
                    let w = self.cfg.weight.as_ref().expect("validated");
                    for (i, v) in u.iter_mut().enumerate() {
                        let b = w.phi(a + h, self.x[i]).value;
                        *v = *v * (self.phi_a[i] - b).exp();
                    }
                }
            }
        }
    }

    /// `(I - theta dt D A) u+ = (I + (1 - theta) dt D A) u` per component.
    fn diffusion(&mut self, u: &mut [StatePoint<T>], t_mid: T, dt: T, theta: T) -> Result<()> {
        let n = u.len();
        let h = self.cfg.domain.step;
        let inv_h2 = T::one() / (h * h);
        let dirichlet = self.cfg.mode.dirichlet();
        // off-diagonal factors of the (conjugated) Laplacian
        let (mut lo_f, mut up_f) = (vec![T::one(); n], vec![T::one(); n]);
        if self.cfg.mode == Mode::WeightedLinear {
            let w = self.cfg.weight.as_ref().expect("validated");
            let phi: Vec<T> = self.x.iter().map(|&x| w.phi(t_mid, x).value).collect();
            for i in 0..n {
                if i > 0 {
                    lo_f[i] = (phi[i - 1] - phi[i]).exp();
                }
                if i + 1 < n {
                    up_f[i] = (phi[i + 1] - phi[i]).exp();
                }
            }
        }
        if !dirichlet {
            // zero flux through mirrored ghost nodes
            up_f[0] = T::of(2.0);
            lo_f[n - 1] = T::of(2.0);
        }
        let diff = self.cfg.params.diffusion();
        for k in 0..2 {
            let c = diff[k] * inv_h2;
            for i in 0..n {
                self.work[i] = u[i].get(k);
            }
            // explicit part
            for i in 0..n {
                let mut lap = -T::of(2.0) * self.work[i];
                if i > 0 {
                    lap += lo_f[i] * self.work[i - 1];
                }
                if i + 1 < n {
                    lap += up_f[i] * self.work[i + 1];
                }
                self.rhs[i] = self.work[i] + (T::one() - theta) * dt * c * lap;
            }
            if theta > T::zero() {
                let a = theta * dt * c;
                for i in 0..n {
                    self.tri.diag[i] = T::one() + a * T::of(2.0);
                    self.tri.lower[i] = if i > 0 { -a * lo_f[i] } else { T::zero() };
                    self.tri.upper[i] = if i + 1 < n { -a * up_f[i] } else { T::zero() };
                }
                if dirichlet {
                    for i in [0, n - 1] {
                        self.tri.diag[i] = T::one();
                        self.tri.lower[i] = T::zero();
                        self.tri.upper[i] = T::zero();
                        self.rhs[i] = T::zero();
                    }
                }
                self.tri.solve_in_place(&mut self.rhs, &mut self.scratch)?;
            } else if dirichlet {
                self.rhs[0] = T::zero();
                self.rhs[n - 1] = T::zero();
            }
            for i in 0..n {
                u[i].set(k, self.rhs[i]);
            }
        }
        Ok(())
    }
}

/// One step of length `cfg.dt` from `state`.
pub fn step<T: Real>(state: &State<T>, cfg: &ScenarioConfig<T>) -> Result<State<T>> {
    let mut integ = Integrator::new(cfg)?;
    let mut next = state.clone();
    integ.step(&mut next, cfg.dt)?;
    Ok(next)
}

/// Integrates to `t_end`, storing snapshots every `snapshot_every` steps.
pub fn simulate<T: Real>(cfg: &ScenarioConfig<T>) -> Result<SpaceTimeField<T>> {
    let mut integ = Integrator::new(cfg)?;
    let mut state = integ.initial_state()?;
    let (n, dt) = cfg.steps();
    let mut field = SpaceTimeField::new(cfg.domain, cfg.mode);
    field.push(state.t, &state.u);
    for s in 1..=n {
        integ.step(&mut state, dt)?;
        state.t = if s == n {
            cfg.t_end
        } else {
            dt * T::of_usize(s)
        };
        if s % cfg.snapshot_every == 0 || s == n {
            field.push(state.t, &state.u);
        }
    }
    Ok(field)
}
