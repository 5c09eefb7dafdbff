use mlsa_core::engine::Field;
use mlsa_core::estimators::{
    ml_allocation, ml_estimator, sa_estimator, sa_rp_estimator, sr_estimator, sr_rp_estimator,
};
use mlsa_core::problems::RootProblem;
use mlsa_core::{
    CallLevelProblem, EstimatorOptions, EstimatorRun, FreezePolicy, GbmModel, Method, ProblemInfo,
    QuantileProblem, RngStream, StepSchedule,
};

use crate::config::{ExperimentConfig, ProblemKind};
use crate::error::Result;

/// Either benchmark problem behind one type.
#[derive(Debug, Clone)]
pub enum Problem {
    Quantile(QuantileProblem),
    CallLevel(CallLevelProblem),
}

impl Problem {
    /// The problem selected by `cfg`, targeting `cfg.target` for call-level.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match cfg.problem {
            ProblemKind::Quantile => Self::Quantile(QuantileProblem::new(cfg.model, cfg.level)?),
            ProblemKind::CallLevel => Self::call_level(cfg.model, cfg.target)?,
        })
    }

    pub fn call_level(model: GbmModel, target: f64) -> Result<Self> {
        Ok(Self::CallLevel(CallLevelProblem::from_target(
            model, target,
        )?))
    }

    pub fn theta_star(&self) -> f64 {
        self.info().theta_star.as_ref().expect("closed-form root")[0]
    }
}

impl Field<f64> for Problem {
    fn dim(&self) -> usize {
        1
    }

    #[inline]
    fn eval(&self, theta: &[f64], x: f64, out: &mut [f64]) {
        match self {
            Self::Quantile(p) => p.eval(theta, x, out),
            Self::CallLevel(p) => p.eval(theta, x, out),
        }
    }
}

impl RootProblem<f64> for Problem {
    fn model(&self) -> &GbmModel {
        match self {
            Self::Quantile(p) => p.model(),
            Self::CallLevel(p) => p.model(),
        }
    }

    fn info(&self) -> &ProblemInfo {
        match self {
            Self::Quantile(p) => p.info(),
            Self::CallLevel(p) => p.info(),
        }
    }
}

/// Estimator settings shared by every replication of an experiment.
#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub method: Method,
    pub schedule: StepSchedule,
    pub beta: f64,
    pub m: u64,
    pub options: EstimatorOptions<f64>,
}

impl MethodSpec {
    pub fn new(cfg: &ExperimentConfig, method: Method) -> Result<Self> {
        Ok(Self {
            method,
            schedule: StepSchedule::new(cfg.gamma0, cfg.exponent_a)?,
            beta: cfg.beta_value(),
            m: cfg.m,
            options: EstimatorOptions {
                theta0: None,
                warm_start: cfg.warm_start,
                freeze: cfg.freeze.then(FreezePolicy::default),
            },
        })
    }

    /// One run of the estimator at bias `n`.
    pub fn run(&self, problem: &Problem, n: u64, stream: RngStream) -> Result<EstimatorRun> {
        let (s, o) = (&self.schedule, &self.options);
        Ok(match self.method {
            Method::Sa => sa_estimator(problem, n, s, o, stream)?,
            Method::SaRp => sa_rp_estimator(problem, n, s, o, stream)?,
            Method::Sr => sr_estimator(problem, n, self.beta, s, o, stream)?,
            Method::SrRp => sr_rp_estimator(problem, n, self.beta, s, o, stream)?,
            Method::Ml => {
                let info = problem.info();
                let alloc = ml_allocation(n, self.m, s, info.weak_order, info.strong_order, false)?;
                ml_estimator(problem, &alloc, s, o, stream)?
            }
        })
    }
}
