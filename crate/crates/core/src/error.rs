use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type used
/// for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coexistence equilibrium is singular: r - alpha1*alpha2 = {det} <= 0")]
    SingularEquilibrium { det: f64 },

    #[error("state ({u1}, {u2}) is not an equilibrium: |g(u)| = {residual}")]
    NotAnEquilibrium { u1: f64, u2: f64, residual: f64 },

    #[error("speed {speed} is below the minimal speed {minimal}")]
    SpeedBelowMinimal { speed: f64, minimal: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("component {component} is not monotone: increase of {violation} at xi = {xi}")]
    Monotonicity {
        component: usize,
        violation: f64,
        xi: f64,
    },

    #[error(
        "profile is not component-wise >= (1, 1) near the left end (first failure at xi = {xi})"
    )]
    BelowUnity { xi: f64 },

    #[error("profile does not cross the midpoint level {level}")]
    NoCrossing { level: f64 },

    #[error("unsupported endpoint configuration: {0}")]
    UnsupportedEndpoints(String),

    #[error("singular linear system (pivot {pivot} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },

    #[error("domain too narrow: state at x = {x} is {distance} away from any equilibrium")]
    DomainTooNarrow { x: f64, distance: f64 },

    #[error("eigensolver failed at theta = {theta}")]
    Eigensolver { theta: f64 },

    #[error("non-finite value at t = {t} (x = {x})")]
    BlowUp { t: f64, x: f64 },

    #[error("time step {dt} violates the explicit diffusion bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("not enough positive samples to fit a decay rate ({count})")]
    DecayFit { count: usize },

    #[error("configuration mismatch: {0}")]
    Mismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
