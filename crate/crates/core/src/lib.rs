//! Stochastic approximation of roots of `h(θ) = E[H(θ, U)]` when `U` can only
//! be sampled through a biased discretization `U^n`.
//!
//! The crate provides the Robbins-Monro recursion (plain and averaged), a GBM
//! Euler-Maruyama sampler with exact coarse/fine coupling, and three families
//! of estimators built on them: single-level, two-level (statistical
//! Romberg) and multi-level. Everything numeric is generic over [`Scalar`]
//! (`f32` or `f64`); the aliases at the crate root fix `f64`.
//!
//! ```
//! use mlsa_core::{estimators, GbmModel, QuantileProblem, RngStream, StepSchedule};
//!
//! let problem = QuantileProblem::new(GbmModel::reference(), 0.7).unwrap();
//! let schedule = StepSchedule::harmonic(200.0).unwrap();
//! let run = estimators::sa_estimator(&problem, 8, &schedule, &Default::default(), RngStream::new(1, 0)).unwrap();
//! assert!((run.estimate[0] - 119.69).abs() < 5.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod estimators;
pub mod normal;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::{EstimatorOptions, LevelAllocation, Method};
pub use rng::RngStream;
pub use scalar::Scalar;

pub type StepSchedule = schedule::StepSchedule<f64>;
pub type GbmModel = sde::GbmModel<f64>;
pub type CoupledTerminalSample = sde::CoupledTerminalSample<f64>;
pub type EulerSampler = sde::EulerSampler<f64>;
pub type ExactSampler = sde::ExactSampler<f64>;
pub type CoupledEulerSampler = sde::CoupledEulerSampler<f64>;
pub type SaConfig = engine::SaConfig<f64>;
pub type SaRun = engine::SaRun<f64>;
pub type FreezePolicy = engine::FreezePolicy<f64>;
pub type QuantileProblem = problems::QuantileProblem<f64>;
pub type CallLevelProblem = problems::CallLevelProblem<f64>;
pub type ProblemInfo = problems::ProblemInfo<f64>;
pub type EstimatorRun = estimators::EstimatorRun<f64>;
