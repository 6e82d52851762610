//! Numerical laboratory for two-front superpositions ("terraces") in the
//! cooperative two-species reaction-diffusion system
//!
//! ```text
//! u1_t = d u1_xx + r u1 (1 - u1) + alpha1 u1 u2
//! u2_t =   u2_xx +   u2 (1 - u2) + alpha2 u1 u2
//! ```
//!
//! The crate computes traveling-front profiles, certifies speed pairs for
//! convective stability, builds the piecewise exponential space-time weight,
//! bounds the numerical range of the weighted linearized operator and
//! integrates the nonlinear, linearized and weighted dynamics.
//!
//! All numerics are generic over a floating point scalar ([`Real`]); the
//! `*F64` aliases at the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod fronts;
pub mod io;
pub mod linalg;
pub mod model;
pub mod scenario;
pub mod spectral;
pub mod speeds;
pub mod weights;

mod real;

pub use error::{Error, Result};
pub use real::Real;

pub type ModelParamsF64 = model::ModelParams<f64>;
pub type StatePointF64 = model::StatePoint<f64>;
pub type Matrix2F64 = model::Matrix2<f64>;
pub type FrontProfileF64 = fronts::FrontProfile<f64>;
pub type SuperpositionSpecF64 = fronts::SuperpositionSpec<f64>;
pub type SpeedCertificateF64 = speeds::SpeedCertificate<f64>;
pub type WeightSpecF64 = weights::WeightSpec<f64>;
pub type DiscreteOperatorF64 = spectral::DiscreteOperator<f64>;
pub type SpaceTimeFieldF64 = evolve::SpaceTimeField<f64>;
pub type ScenarioConfigF64 = evolve::ScenarioConfig<f64>;
