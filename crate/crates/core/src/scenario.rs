//! Ready-made superposition plus weight pairs.
//!
//! The profiles are translated so that the profile bounds behind the
//! diagonal estimate hold on the weight regions: the slow front is at
//! least `(1, 1)` for `y1 <= 1`, and the first component of the fast front
//! is at least `1 - epsilon` for `y2 <= 1`.

use crate::error::{invalid, Result};
use crate::evolve::{Bump, InitialCondition, Mode, ScenarioConfig};
use crate::fronts::{
    kpp_profile, system_front, Endpoints, FrontProfile, SuperpositionSpec, UniformGrid,
};
use crate::model::{ModelParams, StatePoint};
use crate::speeds::{certificate, SpeedCertificate};
use crate::weights::{epsilon_rule, WeightSpec};
use crate::Real;

/// Profile truncation and resolution for the two fronts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrids<T> {
    pub l1: T,
    pub n1: usize,
    pub l2: T,
    pub n2: usize,
}

impl<T: Real> Default for ProfileGrids<T> {
    fn default() -> Self {
        Self {
            l1: T::of(100.0),
            n1: 4001,
            l2: T::of(150.0),
            n2: 6001,
        }
    }
}

/// Parameters of the reference scenario with small coupling.
pub mod reference {
    pub const PARAMS: (f64, f64, f64, f64) = (4.0, 2.0, 0.05, 0.05);
    pub const C1: f64 = 3.0;
    pub const C2: f64 = 13.2;
    pub const KAPPA1: f64 = 0.7929;
    pub const PSI1: f64 = -10.0;
    pub const PSI2: f64 = 10.0;
    /// Leading speed and rates violating the interaction constraint.
    pub const C2_VIOLATING: f64 = 6.0;
    pub const KAPPA1_VIOLATING: f64 = 0.8;
    pub const KAPPA2_VIOLATING: f64 = 0.75;
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedScenario<T> {
    pub params: ModelParams<T>,
    pub spec: SuperpositionSpec<T>,
    pub weight: WeightSpec<T>,
    pub epsilon: T,
}

/// Initial perturbations for the linear runs: Gaussian bumps of width 2
/// and unit L2 norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeBump {
    /// Centered between the two fronts.
    Between,
    /// Five units ahead of the fast front.
    Leading,
}

impl ProbeBump {
    pub const ALL: [ProbeBump; 2] = [ProbeBump::Between, ProbeBump::Leading];
    pub const WIDTH: f64 = 2.0;

    pub fn label(self) -> &'static str {
        match self {
            ProbeBump::Between => "between",
            ProbeBump::Leading => "leading",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.label() == s.trim())
            .ok_or_else(|| invalid("bump", format!("unknown bump `{s}` (between, leading)")))
    }

    pub fn center<T: Real>(self, w: &WeightSpec<T>) -> T {
        match self {
            ProbeBump::Between => (w.psi1 + w.psi2) * T::of(0.5),
            ProbeBump::Leading => w.psi2 + T::of(5.0),
        }
    }

    pub fn initial<T: Real>(self, w: &WeightSpec<T>) -> InitialCondition<T> {
        InitialCondition::Bumps {
            bumps: vec![Bump {
                center: self.center(w),
                width: T::of(Self::WIDTH),
                amplitude: StatePoint::new(T::one(), T::one()),
            }],
            normalize: true,
        }
    }
}

impl<T: Real> WeightedScenario<T> {
    /// Linear or weighted run of `bump` on `domain`.
    pub fn run_config(
        &self,
        mode: Mode,
        bump: ProbeBump,
        domain: UniformGrid<T>,
        t_end: T,
        dt: T,
    ) -> Result<ScenarioConfig<T>> {
        if mode == Mode::Nonlinear {
            return Err(invalid("mode", "probe runs are linear"));
        }
        let mut cfg = ScenarioConfig::new(
            self.params,
            mode,
            bump.initial(&self.weight),
            domain,
            t_end,
            dt,
        );
        cfg.spec = Some(self.spec.clone());
        cfg.weight = Some(self.weight);
        Ok(cfg)
    }
}

/// Slow `e1 -> e3` front with its plateau edge moved to `xi = 1`.
pub fn slow_front<T: Real>(c1: T, p: &ModelParams<T>, l: T, n: usize) -> Result<FrontProfile<T>> {
    let f = system_front(c1, p, Endpoints::E1E3, None, l, n)?;
    let edge = f
        .plateau_edge
        .expect("e1 -> e3 fronts carry a plateau edge");
    Ok(f.translated(T::one() - edge))
}

/// Fast `e3 -> e4` front with `p_1(1) = 1 - eps`.
pub fn fast_front<T: Real>(
    c2: T,
    p: &ModelParams<T>,
    eps: T,
    l: T,
    n: usize,
) -> Result<FrontProfile<T>> {
    let f = kpp_profile(c2, p.d, p.r, l, n)?;
    let at = f.level_crossing(0, T::one() - eps)?;
    Ok(f.translated(T::one() - at))
}

/// Superposition and weight for arbitrary rates.
pub fn build<T: Real>(
    p: &ModelParams<T>,
    cert: SpeedCertificate<T>,
    psi1: T,
    psi2: T,
    grids: ProfileGrids<T>,
) -> Result<WeightedScenario<T>> {
    let epsilon = epsilon_rule(&cert, p)?;
    let p1 = slow_front(cert.c1, p, grids.l1, grids.n1)?;
    let p2 = fast_front(cert.c2, p, epsilon, grids.l2, grids.n2)?;
    let spec = SuperpositionSpec::new(p1, p2, psi1, psi2)?;
    let weight = WeightSpec::for_superposition(cert, &spec)?;
    Ok(WeightedScenario {
        params: *p,
        spec,
        weight,
        epsilon,
    })
}

/// Scenario whose rates satisfy all speed inequalities; `kappa1 = None`
/// uses the default selection rule.
pub fn compliant<T: Real>(
    p: &ModelParams<T>,
    c1: T,
    c2: T,
    kappa1: Option<T>,
    psi1: T,
    psi2: T,
    grids: ProfileGrids<T>,
) -> Result<WeightedScenario<T>> {
    let cert = certificate(c1, c2, p, kappa1)?.map_err(|rep| {
        invalid(
            "c",
            format!("speed pair ({c1}, {c2}) is not certified: {rep}"),
        )
    })?;
    build(p, cert, psi1, psi2, grids)
}

/// Scenario with the given rates whether or not they satisfy the
/// inequalities.
#[allow(clippy::too_many_arguments)]
pub fn forced<T: Real>(
    p: &ModelParams<T>,
    c1: T,
    c2: T,
    kappa1: T,
    kappa2: T,
    psi1: T,
    psi2: T,
    grids: ProfileGrids<T>,
) -> Result<WeightedScenario<T>> {
    let cert = WeightSpec::forced(c1, c2, kappa1, kappa2, psi1, psi2, p)?.cert;
    build(p, cert, psi1, psi2, grids)
}

pub fn reference_params<T: Real>() -> ModelParams<T> {
    let (d, r, a1, a2) = reference::PARAMS;
    ModelParams::new(T::of(d), T::of(r), T::of(a1), T::of(a2))
        .expect("reference parameters are valid")
}

/// The reference compliant scenario.
pub fn reference_compliant<T: Real>() -> Result<WeightedScenario<T>> {
    use reference::*;
    compliant(
        &reference_params(),
        T::of(C1),
        T::of(C2),
        Some(T::of(KAPPA1)),
        T::of(PSI1),
        T::of(PSI2),
        ProfileGrids::default(),
    )
}

/// The reference scenario with a leading speed that violates the
/// interaction constraint.
pub fn reference_violating<T: Real>() -> Result<WeightedScenario<T>> {
    use reference::*;
    forced(
        &reference_params(),
        T::of(C1),
        T::of(C2_VIOLATING),
        T::of(KAPPA1_VIOLATING),
        T::of(KAPPA2_VIOLATING),
        T::of(PSI1),
        T::of(PSI2),
        ProfileGrids::default(),
    )
}
