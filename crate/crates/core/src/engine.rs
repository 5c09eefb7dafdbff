//! Robbins-Monro recursion `θ_{p+1} = θ_p − γ_{p+1} H(θ_p, U_{p+1})`, its
//! Ruppert-Polyak average, and two chains driven by coupled innovations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::schedule::StepSchedule;
use crate::sde::{CoupledSampler, TerminalSampler};

/// Field `H(θ, x)` with values in `R^d`.
pub trait Field<T>: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, theta: &[T], x: T, out: &mut [T]);
}

/// One-dimensional field from a closure `(θ, x) ↦ H`.
#[derive(Clone, Copy)]
pub struct ScalarField<F>(pub F);

impl<T, F> Field<T> for ScalarField<F>
where
    T: Copy,
    F: Fn(T, T) -> T + Sync,
{
    fn dim(&self) -> usize {
        1
    }

    #[inline]
    fn eval(&self, theta: &[T], x: T, out: &mut [T]) {
        out[0] = (self.0)(theta[0], x);
    }
}

/// Rejects over-large increments during an initial burn window.
///
/// At step `p ≤ burn_fraction · M`, a move with `|θ_{p} − θ_{p−1}| > K/√p` is
/// discarded and the chain keeps its previous value. The innovation is still
/// consumed and charged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezePolicy<T> {
    pub k: T,
    pub burn_fraction: T,
}

impl<T: Scalar> Default for FreezePolicy<T> {
    fn default() -> Self {
        Self {
            k: T::lit(5.0),
            burn_fraction: T::lit(0.01),
        }
    }
}

impl<T: Scalar> FreezePolicy<T> {
    pub fn new(k: T, burn_fraction: T) -> Result<Self> {
        if !(k > T::zero()) || !(burn_fraction > T::zero() && burn_fraction <= T::one()) {
            return Err(Error::domain(format!(
                "freeze policy needs K > 0 and burn fraction in (0,1], got {k}, {burn_fraction}"
            )));
        }
        Ok(Self { k, burn_fraction })
    }

    #[inline]
    fn active(&self, p: u64, total_steps: u64) -> bool {
        T::from_count(p) <= self.burn_fraction * T::from_count(total_steps)
    }

    /// Whether the move `prev → next` at step `p ≥ 1` is kept.
    #[inline]
    pub fn accepts(&self, prev: &[T], next: &[T], p: u64, total_steps: u64) -> bool {
        if !self.active(p, total_steps) {
            return true;
        }
        let step2 = prev
            .iter()
            .zip(next)
            .fold(T::zero(), |acc, (&a, &b)| acc + (b - a) * (b - a));
        let bound = self.k / T::from_count(p.max(1)).sqrt();
        step2 <= bound * bound
    }
}

/// The accepted iterate for step `p`: `next`, or `prev` if the move is frozen.
pub fn apply_freeze<'a, T: Scalar>(
    prev: &'a [T],
    next: &'a [T],
    p: u64,
    policy: &FreezePolicy<T>,
    total_steps: u64,
) -> &'a [T] {
    if policy.accepts(prev, next, p, total_steps) {
        next
    } else {
        prev
    }
}

/// `θ̄_p = θ̄_{p−1} − (θ̄_{p−1} − θ_p)/(p+1)`, the mean of `θ_0..θ_p`.
#[derive(Debug, Clone)]
pub struct RunningMean<T> {
    mean: Vec<T>,
    count: u64,
}

impl<T: Scalar> RunningMean<T> {
    pub fn new(first: &[T]) -> Self {
        Self {
            mean: first.to_vec(),
            count: 1,
        }
    }

    #[inline]
    pub fn push(&mut self, theta: &[T]) {
        self.count += 1;
        let w = T::one() / T::from_count(self.count);
        for (m, &t) in self.mean.iter_mut().zip(theta) {
            *m -= w * (*m - t);
        }
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn into_mean(self) -> Vec<T> {
        self.mean
    }
}

#[derive(Debug, Clone)]
pub struct SaConfig<T> {
    pub schedule: StepSchedule<T>,
    pub steps: u64,
    pub theta0: Vec<T>,
    pub freeze: Option<FreezePolicy<T>>,
    /// Keep `θ_0..θ_M` in [`SaRun::trajectory`].
    pub record_trajectory: bool,
}

impl<T: Scalar> SaConfig<T> {
    pub fn new(schedule: StepSchedule<T>, steps: u64, theta0: Vec<T>) -> Self {
        Self {
            schedule,
            steps,
            theta0,
            freeze: None,
            record_trajectory: false,
        }
    }

    pub fn with_freeze(mut self, policy: FreezePolicy<T>) -> Self {
        self.freeze = Some(policy);
        self
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.theta0.len() != dim {
            return Err(Error::domain(format!(
                "theta0 has dimension {}, field expects {dim}",
                self.theta0.len()
            )));
        }
        if self.theta0.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("theta0 must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaRun<T> {
    pub final_theta: Vec<T>,
    pub averaged_theta: Option<Vec<T>>,
    pub cost_h_evals: u64,
    pub cost_euler_substeps: u64,
    pub frozen_steps: u64,
    /// `θ_0..θ_M` when requested, otherwise empty.
    pub trajectory: Vec<Vec<T>>,
}

/// Two chains sharing innovations: coarse member and fine member.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun<T> {
    pub coarse: SaRun<T>,
    pub fine: SaRun<T>,
}

impl<T: Scalar> CoupledRun<T> {
    pub fn total_cost(&self) -> u64 {
        self.coarse.cost_euler_substeps + self.fine.cost_euler_substeps
    }

    /// `θ^fine − θ^coarse`, using the averages when both chains have one.
    pub fn correction(&self) -> Vec<T> {
        let (f, c) = match (&self.fine.averaged_theta, &self.coarse.averaged_theta) {
            (Some(f), Some(c)) => (f, c),
            _ => (&self.fine.final_theta, &self.coarse.final_theta),
        };
        f.iter().zip(c).map(|(&a, &b)| a - b).collect()
    }
}

/// State of one recursion.
struct Chain<T> {
    theta: Vec<T>,
    next: Vec<T>,
    h: Vec<T>,
    mean: Option<RunningMean<T>>,
    frozen: u64,
    trajectory: Vec<Vec<T>>,
}

impl<T: Scalar> Chain<T> {
    fn new(config: &SaConfig<T>, averaging: bool) -> Self {
        let d = config.theta0.len();
        let mut trajectory = Vec::new();
        if config.record_trajectory {
            trajectory.reserve(config.steps as usize + 1);
            trajectory.push(config.theta0.clone());
        }
        Self {
            theta: config.theta0.clone(),
            next: vec![T::zero(); d],
            h: vec![T::zero(); d],
            mean: averaging.then(|| RunningMean::new(&config.theta0)),
            frozen: 0,
            trajectory,
        }
    }

    #[inline]
    fn step<F: Field<T>>(&mut self, field: &F, x: T, p: u64, config: &SaConfig<T>) -> Result<()> {
        field.eval(&self.theta, x, &mut self.h);
        let gamma = config.schedule.gamma_at(p);
        let mut finite = true;
        for ((n, &t), &h) in self.next.iter_mut().zip(&self.theta).zip(&self.h) {
            *n = t - gamma * h;
            finite &= n.is_finite();
        }
        if !finite {
            return Err(Error::NonFinite {
                step: p,
                last_theta: self.theta.iter().map(|t| t.as_f64()).collect(),
            });
        }
        let accept = config
            .freeze
            .as_ref()
            .is_none_or(|f| f.accepts(&self.theta, &self.next, p, config.steps));
        if accept {
            std::mem::swap(&mut self.theta, &mut self.next);
        } else {
            self.frozen += 1;
        }
        if let Some(m) = self.mean.as_mut() {
            m.push(&self.theta);
        }
        if config.record_trajectory {
            self.trajectory.push(self.theta.clone());
        }
        Ok(())
    }

    fn finish(self, steps: u64, cost_per_step: u64) -> SaRun<T> {
        SaRun {
            final_theta: self.theta,
            averaged_theta: self.mean.map(RunningMean::into_mean),
            cost_h_evals: steps,
            cost_euler_substeps: steps * cost_per_step,
            frozen_steps: self.frozen,
            trajectory: self.trajectory,
        }
    }
}

fn run_chain<T, S, F, R>(
    sampler: &S,
    field: &F,
    config: &SaConfig<T>,
    averaging: bool,
    rng: &mut R,
) -> Result<SaRun<T>>
where
    T: Scalar,
    S: TerminalSampler<T>,
    F: Field<T>,
    R: Rng + ?Sized,
{
    config.validate(field.dim())?;
    let mut chain = Chain::new(config, averaging);
    for p in 1..=config.steps {
        let x = sampler.sample(rng);
        chain.step(field, x, p, config)?;
    }
    Ok(chain.finish(config.steps, sampler.cost()))
}

/// Plain recursion for `config.steps` steps.
pub fn run_sa<T, S, F, R>(
    sampler: &S,
    field: &F,
    config: &SaConfig<T>,
    rng: &mut R,
) -> Result<SaRun<T>>
where
    T: Scalar,
    S: TerminalSampler<T>,
    F: Field<T>,
    R: Rng + ?Sized,
{
    run_chain(sampler, field, config, false, rng)
}

/// Recursion plus the running mean of its iterates. Needs a slow schedule
/// (`a < 1`).
pub fn run_sa_averaged<T, S, F, R>(
    sampler: &S,
    field: &F,
    config: &SaConfig<T>,
    rng: &mut R,
) -> Result<SaRun<T>>
where
    T: Scalar,
    S: TerminalSampler<T>,
    F: Field<T>,
    R: Rng + ?Sized,
{
    require_slow(&config.schedule)?;
    run_chain(sampler, field, config, true, rng)
}

pub(crate) fn require_slow<T: Scalar>(schedule: &StepSchedule<T>) -> Result<()> {
    if !schedule.is_slow() {
        return Err(Error::config(
            "a in (1/2, 1)",
            format!(
                "iterate averaging needs a slowly decreasing step, got a = {}",
                schedule.exponent()
            ),
        ));
    }
    Ok(())
}

/// Two recursions, one per member of each coupled draw.
pub fn run_coupled_sa<T, S, F, R>(
    sampler: &S,
    field: &F,
    config: &SaConfig<T>,
    averaging: bool,
    rng: &mut R,
) -> Result<CoupledRun<T>>
where
    T: Scalar,
    S: CoupledSampler<T>,
    F: Field<T>,
    R: Rng + ?Sized,
{
    config.validate(field.dim())?;
    if averaging {
        require_slow(&config.schedule)?;
    }
    let mut coarse = Chain::new(config, averaging);
    let mut fine = Chain::new(config, averaging);
    for p in 1..=config.steps {
        let (xc, xf) = sampler.sample_pair(rng);
        coarse.step(field, xc, p, config)?;
        fine.step(field, xf, p, config)?;
    }
    Ok(CoupledRun {
        coarse: coarse.finish(config.steps, sampler.coarse_cost()),
        fine: fine.finish(config.steps, sampler.fine_cost()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::sde::{CoupledEulerSampler, EulerSampler, GbmModel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Innovation source that always returns the same value.
    struct Constant(f64);

    impl TerminalSampler<f64> for Constant {
        fn sample<R: rand::Rng + ?Sized>(&self, _rng: &mut R) -> f64 {
            self.0
        }
        fn cost(&self) -> u64 {
            3
        }
    }

    fn harmonic(g: f64) -> StepSchedule<f64> {
        StepSchedule::harmonic(g).unwrap()
    }

    #[test]
    fn unit_gain_hits_target_in_one_step() {
        let field = ScalarField(|t: f64, c: f64| t - c);
        let cfg = SaConfig::new(harmonic(1.0), 1, vec![-37.0]);
        let mut rng = RngStream::new(0, 0).rng();
        let run = run_sa(&Constant(4.5), &field, &cfg, &mut rng).unwrap();
        assert_eq!(run.final_theta, vec![4.5]);
        let cfg = SaConfig::new(harmonic(1.0), 50, vec![-37.0]);
        let run = run_sa(&Constant(4.5), &field, &cfg, &mut rng).unwrap();
        assert_relative_eq!(run.final_theta[0], 4.5, epsilon = 1e-12);
        assert_eq!(run.cost_euler_substeps, 150);
        assert_eq!(run.cost_h_evals, 50);
    }

    #[test]
    fn zero_steps_returns_start() {
        let field = ScalarField(|t: f64, _x: f64| t);
        let cfg = SaConfig::new(harmonic(1.0), 0, vec![2.5]);
        let mut rng = RngStream::new(0, 0).rng();
        let run = run_sa(&Constant(0.0), &field, &cfg, &mut rng).unwrap();
        assert_eq!(run.final_theta, vec![2.5]);
        assert_eq!(run.cost_euler_substeps, 0);
    }

    #[test]
    fn averaged_linear_field_closed_form() {
        let s = StepSchedule::new(0.5, 0.75).unwrap();
        let field = ScalarField(|t: f64, _x: f64| t);
        let cfg = SaConfig::new(s, 40, vec![1.0]).with_trajectory();
        let mut rng = RngStream::new(0, 0).rng();
        let run = run_sa_averaged(&Constant(0.0), &field, &cfg, &mut rng).unwrap();
        let mut prod = 1.0;
        let mut expected = vec![1.0];
        for p in 1..=40u64 {
            prod *= 1.0 - s.gamma(p).unwrap();
            expected.push(prod);
        }
        for (got, want) in run.trajectory.iter().zip(&expected) {
            assert_relative_eq!(got[0], *want, max_relative = 1e-12);
        }
        let mean = expected.iter().sum::<f64>() / 41.0;
        assert_relative_eq!(run.averaged_theta.unwrap()[0], mean, max_relative = 1e-10);
    }

    #[test]
    fn averaging_rejects_harmonic_schedule() {
        let field = ScalarField(|t: f64, _x: f64| t);
        let cfg = SaConfig::new(harmonic(1.0), 5, vec![1.0]);
        let mut rng = RngStream::new(0, 0).rng();
        let err = run_sa_averaged(&Constant(0.0), &field, &cfg, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn divergence_is_reported() {
        let field = ScalarField(|t: f64, _x: f64| -t * 1e200);
        let cfg = SaConfig::new(harmonic(10.0), 100, vec![1.0]);
        let mut rng = RngStream::new(0, 0).rng();
        match run_sa(&Constant(0.0), &field, &cfg, &mut rng) {
            Err(Error::NonFinite { step, last_theta }) => {
                assert!(step >= 1);
                assert!(last_theta[0].is_finite());
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn freeze_threshold() {
        let f = FreezePolicy::<f64>::default();
        assert!(f.accepts(&[1.0], &[1.0], 1, 1000));
        // p = 100 > 0.01 * 1000: inactive
        assert!(f.accepts(&[0.0], &[1e6], 100, 1000));
        // K / sqrt(100) = 0.5 < 1
        assert!(!f.accepts(&[0.0], &[1.0], 100, 100_000));
        assert!(f.accepts(&[0.0], &[0.4], 100, 100_000));
        assert_eq!(apply_freeze(&[0.0], &[1.0], 100, &f, 100_000), &[0.0]);
        assert!(FreezePolicy::new(0.0, 0.5).is_err());
        assert!(FreezePolicy::new(1.0, 0.0).is_err());
    }

    #[test]
    fn frozen_steps_are_counted_and_charged() {
        // H = -1 every step: γ(p) = 100/p exceeds 5/√p while p < 400
        let field = ScalarField(|_t: f64, _x: f64| -1.0);
        let cfg =
            SaConfig::new(harmonic(100.0), 100_000, vec![0.0]).with_freeze(FreezePolicy::default());
        let mut rng = RngStream::new(0, 0).rng();
        let run = run_sa(&Constant(0.0), &field, &cfg, &mut rng).unwrap();
        assert_eq!(run.frozen_steps, 399);
        assert_eq!(run.cost_euler_substeps, 300_000);
    }

    #[test]
    fn equal_levels_give_identical_chains() {
        let model = GbmModel::<f64>::reference();
        let sampler = CoupledEulerSampler::new(model, 8, 8).unwrap();
        let field = ScalarField(|t: f64, x: f64| if x <= t { 0.3 } else { -0.7 });
        let cfg = SaConfig::new(harmonic(200.0), 2000, vec![100.0]);
        let mut rng = RngStream::new(5, 0).rng();
        let run = run_coupled_sa(&sampler, &field, &cfg, false, &mut rng).unwrap();
        assert_eq!(run.coarse.final_theta, run.fine.final_theta);
        assert_eq!(run.correction(), vec![0.0]);
        assert_eq!(run.total_cost(), 2000 * 16);
    }

    #[test]
    fn coupled_cost_accounting() {
        let model = GbmModel::<f64>::reference();
        let sampler = CoupledEulerSampler::new(model, 4, 16).unwrap();
        let field = ScalarField(|t: f64, x: f64| if x <= t { 0.3 } else { -0.7 });
        let cfg = SaConfig::new(harmonic(200.0), 500, vec![100.0]);
        let mut rng = RngStream::new(5, 0).rng();
        let run = run_coupled_sa(&sampler, &field, &cfg, false, &mut rng).unwrap();
        assert_eq!(run.coarse.cost_euler_substeps, 500 * 4);
        assert_eq!(run.fine.cost_euler_substeps, 500 * 16);
    }

    #[test]
    fn single_level_cost_is_m_times_n() {
        let model = GbmModel::<f64>::reference();
        let sampler = EulerSampler::new(model, 7).unwrap();
        let field = ScalarField(|t: f64, x: f64| if x <= t { 0.3 } else { -0.7 });
        let cfg = SaConfig::new(harmonic(200.0), 321, vec![100.0]);
        let mut rng = RngStream::new(5, 0).rng();
        let run = run_sa(&sampler, &field, &cfg, &mut rng).unwrap();
        assert_eq!(run.cost_euler_substeps, 321 * 7);
    }

    proptest! {
        #[test]
        fn running_mean_is_arithmetic_mean(xs in proptest::collection::vec(-1e3f64..1e3, 1..200)) {
            let mut m = RunningMean::new(&xs[..1]);
            for x in &xs[1..] {
                m.push(std::slice::from_ref(x));
            }
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let scale = xs.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            prop_assert!((m.mean()[0] - mean).abs() <= 1e-10 * scale);
        }
    }
}
