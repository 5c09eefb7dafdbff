//! Root estimators built on the SA engine, with their step budgets and cost
//! formulas.
//!
//! | method | estimate | steps |
//! |--------|----------|-------|
//! | SA     | `θ^n_M` | `M = γ⁻¹(n^{−2α})` |
//! | SA-RP  | `θ̄^n_M` | `M = ⌈n^{2α}⌉` |
//! | SR     | `θ^{n^β}_{M₁} + θ^n_{M₂} − θ^{n^β}_{M₂}` | `M₁ = γ⁻¹(n^{−2α})`, `M₂ = γ⁻¹(n^{−2α+2ρβ})` |
//! | SR-RP  | same with averages | `M₃ = ⌈n^{2α}⌉`, `M₄ = ⌈n^{2α−2ρβ}⌉` |
//! | ML     | `θ^1_{M₀} + Σ_ℓ θ^{m^ℓ}_{M_ℓ} − θ^{m^{ℓ−1}}_{M_ℓ}` | see [`ml_allocation`] |
//!
//! Independent pieces of one estimator (level 0, each correction) draw from
//! distinct child streams of the caller's [`RngStream`].

use std::fmt;
use std::str::FromStr;

use crate::engine::{
    run_coupled_sa, run_sa, run_sa_averaged, CoupledRun, FreezePolicy, SaConfig, SaRun,
};
use crate::error::{Error, Result};
use crate::problems::RootProblem;
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::schedule::StepSchedule;
use crate::sde::{CoupledEulerSampler, EulerSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sa,
    SaRp,
    Sr,
    SrRp,
    Ml,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sa => "sa",
            Method::SaRp => "sa-rp",
            Method::Sr => "sr",
            Method::SrRp => "sr-rp",
            Method::Ml => "ml",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sa" => Ok(Method::Sa),
            "sa-rp" => Ok(Method::SaRp),
            "sr" => Ok(Method::Sr),
            "sr-rp" => Ok(Method::SrRp),
            "ml" => Ok(Method::Ml),
            other => Err(Error::domain(format!("unknown method '{other}'"))),
        }
    }
}

/// Knobs shared by all estimators.
#[derive(Debug, Clone)]
pub struct EstimatorOptions<T> {
    /// Starting point; the problem's default when `None`.
    pub theta0: Option<Vec<T>>,
    /// Start each correction pair at the running estimate instead of `theta0`.
    pub warm_start: bool,
    /// Applied to every chain of the estimator.
    pub freeze: Option<FreezePolicy<T>>,
}

impl<T> Default for EstimatorOptions<T> {
    fn default() -> Self {
        Self {
            theta0: None,
            warm_start: true,
            freeze: None,
        }
    }
}

/// Diagnostics for one coupled correction `θ^{fine} − θ^{coarse}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport<T> {
    pub n_coarse: u64,
    pub n_fine: u64,
    pub steps: u64,
    pub correction: Vec<T>,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun<T> {
    pub method: Method,
    pub estimate: Vec<T>,
    /// Euler sub-steps consumed.
    pub total_cost: u64,
    pub h_evals: u64,
    pub frozen_steps: u64,
    pub stream: RngStream,
    /// Correction levels in order; empty for single-level methods.
    pub levels: Vec<LevelReport<T>>,
}

impl<T: Scalar> EstimatorRun<T> {
    fn from_single(method: Method, run: SaRun<T>, estimate: Vec<T>, stream: RngStream) -> Self {
        Self {
            method,
            estimate,
            total_cost: run.cost_euler_substeps,
            h_evals: run.cost_h_evals,
            frozen_steps: run.frozen_steps,
            stream,
            levels: Vec::new(),
        }
    }

    fn add_level(
        &mut self,
        pair: &CoupledRun<T>,
        n_coarse: u64,
        n_fine: u64,
        steps: u64,
    ) -> Vec<T> {
        let correction = pair.correction();
        self.total_cost += pair.total_cost();
        self.h_evals += pair.coarse.cost_h_evals + pair.fine.cost_h_evals;
        self.frozen_steps += pair.coarse.frozen_steps + pair.fine.frozen_steps;
        for (e, c) in self.estimate.iter_mut().zip(&correction) {
            *e += *c;
        }
        self.levels.push(LevelReport {
            n_coarse,
            n_fine,
            steps,
            correction: correction.clone(),
            cost: pair.total_cost(),
        });
        correction
    }
}

fn pow<T: Scalar>(base: u64, exp: T) -> T {
    T::from_count(base).powf(exp)
}

fn ceil_count<T: Scalar>(x: T) -> Result<u64> {
    x.ceil()
        .to_u64()
        .map(|v| v.max(1))
        .ok_or_else(|| Error::domain(format!("step count {x} is not representable")))
}

/// `n^β` rounded to the nearest integer, at least 1.
pub fn coarse_bias<T: Scalar>(n: u64, beta: T) -> u64 {
    pow::<T>(n, beta).round().to_u64().unwrap_or(1).max(1)
}

/// `β* = 1/(1 + 2ρ)`, the coarse exponent minimizing the two-level cost.
pub fn beta_star<T: Scalar>(rho: T) -> Result<T> {
    if !(rho > T::zero() && rho <= T::lit(0.5)) {
        return Err(Error::domain(format!(
            "rho must lie in (0, 1/2], got {rho}"
        )));
    }
    Ok(T::one() / (T::one() + T::lit(2.0) * rho))
}

/// Steps of the single-level recursion: `γ⁻¹(1/n^{2α})`.
pub fn sa_steps<T: Scalar>(n: u64, alpha: T, schedule: &StepSchedule<T>) -> Result<u64> {
    schedule.gamma_inv(pow::<T>(n, -T::lit(2.0) * alpha))
}

/// `(M₁, M₂)` of the two-level estimator.
pub fn sr_steps<T: Scalar>(
    n: u64,
    alpha: T,
    rho: T,
    beta: T,
    schedule: &StepSchedule<T>,
) -> Result<(u64, u64)> {
    let two = T::lit(2.0);
    let m1 = schedule.gamma_inv(pow::<T>(n, -two * alpha))?;
    let m2 = schedule.gamma_inv(pow::<T>(n, -(two * alpha - two * rho * beta)))?;
    Ok((m1, m2))
}

/// `(M₃, M₄) = (⌈n^{2α}⌉, ⌈n^{2α−2ρβ}⌉)` of the averaged two-level estimator.
pub fn sr_rp_steps<T: Scalar>(n: u64, alpha: T, rho: T, beta: T) -> Result<(u64, u64)> {
    let two = T::lit(2.0);
    Ok((
        ceil_count(pow::<T>(n, two * alpha))?,
        ceil_count(pow::<T>(n, two * alpha - two * rho * beta))?,
    ))
}

/// `C_SA = n · γ⁻¹(1/n^{2α})`.
pub fn complexity_sa<T: Scalar>(n: u64, alpha: T, schedule: &StepSchedule<T>) -> Result<T> {
    Ok(T::from_count(n) * T::from_count(sa_steps(n, alpha, schedule)?))
}

/// `C_SR = n^β γ⁻¹(1/n^{2α}) + (n + n^β) γ⁻¹(1/n^{2α−2ρβ})`, with real `n^β`.
pub fn complexity_sr<T: Scalar>(
    n: u64,
    alpha: T,
    rho: T,
    beta: T,
    schedule: &StepSchedule<T>,
) -> Result<T> {
    let (m1, m2) = sr_steps(n, alpha, rho, beta, schedule)?;
    let nb = pow::<T>(n, beta);
    Ok(nb * T::from_count(m1) + (T::from_count(n) + nb) * T::from_count(m2))
}

/// `C_ML = M₀ + Σ_ℓ M_ℓ (m^ℓ + m^{ℓ−1})`.
pub fn complexity_ml<T: Scalar>(allocation: &LevelAllocation) -> T {
    T::from_count(allocation.total_cost())
}

/// Level sizes of the multi-level estimator for `n = m^L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelAllocation {
    pub m: u64,
    pub levels: u32,
    pub n: u64,
    pub m0: u64,
    /// `M_1..M_L`.
    pub steps: Vec<u64>,
}

impl LevelAllocation {
    /// Bias parameters `(m^{ℓ−1}, m^ℓ)` of level `ℓ ≥ 1`.
    pub fn level_biases(&self, level: u32) -> (u64, u64) {
        (self.m.pow(level - 1), self.m.pow(level))
    }

    /// Euler sub-steps of one run of the estimator.
    pub fn total_cost(&self) -> u64 {
        self.m0
            + self
                .steps
                .iter()
                .enumerate()
                .map(|(i, &ml)| {
                    let (c, f) = self.level_biases(i as u32 + 1);
                    ml * (c + f)
                })
                .sum::<u64>()
    }
}

/// `L` with `m^L = n`, if any.
pub fn exact_level_count(n: u64, m: u64) -> Option<u32> {
    if m < 2 || n < m {
        return None;
    }
    let mut power = 1u64;
    let mut levels = 0u32;
    while power < n {
        power = power.checked_mul(m)?;
        levels += 1;
    }
    (power == n).then_some(levels)
}

/// Step budgets per level.
///
/// With `ρ = 1/2` (which requires `α = 1`): `M₀ = γ⁻¹(1/n²)` and
/// `M_ℓ = γ⁻¹(m^ℓ log m / (n² log n (m−1)))`. With `ρ < 1/2`:
/// `M₀ = γ⁻¹(1/n^{2α})` and
/// `M_ℓ = γ⁻¹(m^{ℓ(1+2ρ)/2}(m^{(1−2ρ)/2} − 1) / (n^{2α}(n^{(1−2ρ)/2} − 1)))`.
///
/// `reduced_m0` swaps in the cheaper first level `γ⁻¹(1/(n² log n))`
/// (resp. `γ⁻¹(1/(n^{2α} n^{1−2ρ}))`).
pub fn ml_allocation<T: Scalar>(
    n: u64,
    m: u64,
    schedule: &StepSchedule<T>,
    alpha: T,
    rho: T,
    reduced_m0: bool,
) -> Result<LevelAllocation> {
    if !(2..=12).contains(&m) {
        return Err(Error::domain(format!(
            "level ratio m must lie in 2..=12, got {m}"
        )));
    }
    let levels = exact_level_count(n, m)
        .ok_or_else(|| Error::domain(format!("n = {n} is not a positive power of m = {m}")))?;
    let half = T::lit(0.5);
    if !(rho > T::zero() && rho <= half) {
        return Err(Error::domain(format!(
            "rho must lie in (0, 1/2], got {rho}"
        )));
    }
    let two = T::lit(2.0);
    let nf = T::from_count(n);
    let mf = T::from_count(m);
    let (m0, steps) = if rho == half {
        if alpha != T::one() {
            return Err(Error::config(
                "alpha = 1 when rho = 1/2",
                format!("got alpha = {alpha}"),
            ));
        }
        let n2 = nf * nf;
        let y0 = if reduced_m0 {
            T::one() / (n2 * nf.ln())
        } else {
            T::one() / n2
        };
        let m0 = schedule.gamma_inv(y0)?;
        let steps = (1..=levels)
            .map(|l| {
                let y = mf.powi(l as i32) * mf.ln() / (n2 * nf.ln() * (mf - T::one()));
                schedule.gamma_inv(y)
            })
            .collect::<Result<Vec<_>>>()?;
        (m0, steps)
    } else {
        let c = (T::one() - two * rho) / two;
        let n2a = nf.powf(two * alpha);
        let y0 = if reduced_m0 {
            T::one() / (n2a * nf.powf(T::one() - two * rho))
        } else {
            T::one() / n2a
        };
        let m0 = schedule.gamma_inv(y0)?;
        let steps = (1..=levels)
            .map(|l| {
                let num = mf.powf(T::from_count(l as u64) * (T::one() + two * rho) / two)
                    * (mf.powf(c) - T::one());
                let den = n2a * (nf.powf(c) - T::one());
                schedule.gamma_inv(num / den)
            })
            .collect::<Result<Vec<_>>>()?;
        (m0, steps)
    };
    Ok(LevelAllocation {
        m,
        levels,
        n,
        m0,
        steps,
    })
}

/// Stationary variance `Γ / (2(h' − ζ))` of the scalar recursion, the
/// solution of `Γ − 2(h' − ζ)A = 0`. Use `ζ = 0` for `a < 1` and
/// `ζ = 1/(2γ₀)` for `a = 1`.
pub fn scalar_clt_variance<T: Scalar>(dh: T, gamma_star: T, zeta: T) -> Result<T> {
    if !(dh > zeta) {
        return Err(Error::config(
            "h'(theta*) > zeta",
            format!("h' = {dh}, zeta = {zeta}: the linearized recursion is unstable"),
        ));
    }
    Ok(gamma_star / (T::lit(2.0) * (dh - zeta)))
}

/// The `ζ` entering [`scalar_clt_variance`] for a schedule.
pub fn schedule_zeta<T: Scalar>(schedule: &StepSchedule<T>) -> T {
    if schedule.is_harmonic() {
        T::one() / (T::lit(2.0) * schedule.gamma0())
    } else {
        T::zero()
    }
}

fn start_point<T: Scalar, P: RootProblem<T>>(problem: &P, options: &EstimatorOptions<T>) -> Vec<T> {
    options
        .theta0
        .clone()
        .unwrap_or_else(|| problem.initial_theta())
}

fn config<T: Scalar>(
    schedule: &StepSchedule<T>,
    steps: u64,
    theta0: Vec<T>,
    options: &EstimatorOptions<T>,
) -> SaConfig<T> {
    SaConfig {
        schedule: *schedule,
        steps,
        theta0,
        freeze: options.freeze,
        record_trajectory: false,
    }
}

fn check_hs2<T: Scalar, P: RootProblem<T>>(problem: &P, schedule: &StepSchedule<T>) -> Result<()> {
    if let (true, Some(lambda)) = (schedule.is_harmonic(), problem.info().lambda_lower) {
        if !schedule.validate_hs2(lambda) {
            return Err(Error::config(
                "2 lambda gamma0 > 1",
                format!("lambda = {lambda}, gamma0 = {}", schedule.gamma0()),
            ));
        }
    }
    Ok(())
}

fn check_two_level<T: Scalar>(alpha: T, rho: T, beta: T) -> Result<()> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::domain(format!("beta must lie in (0,1), got {beta}")));
    }
    let two_rho_beta = T::lit(2.0) * rho * beta;
    if !(alpha > rho && alpha > two_rho_beta) {
        return Err(Error::config(
            "alpha > max(rho, 2 rho beta)",
            format!("alpha = {alpha}, rho = {rho}, beta = {beta}"),
        ));
    }
    Ok(())
}

/// Single-level estimator `θ^n_M`, `M = γ⁻¹(1/n^{2α})`.
pub fn sa_estimator<T: Scalar, P: RootProblem<T>>(
    problem: &P,
    n: u64,
    schedule: &StepSchedule<T>,
    options: &EstimatorOptions<T>,
    stream: RngStream,
) -> Result<EstimatorRun<T>> {
    check_hs2(problem, schedule)?;
    let steps = sa_steps(n, problem.info().weak_order, schedule)?;
    let sampler = EulerSampler::new(*problem.model(), n)?;
    let cfg = config(schedule, steps, start_point(problem, options), options);
    let run = run_sa(&sampler, problem, &cfg, &mut stream.rng())?;
    let estimate = run.final_theta.clone();
    Ok(EstimatorRun::from_single(Method::Sa, run, estimate, stream))
}

/// Averaged single-level estimator `θ̄^n_M`, `M = ⌈n^{2α}⌉`, for `a ∈ (1/2,1)`.
pub fn sa_rp_estimator<T: Scalar, P: RootProblem<T>>(
    problem: &P,
    n: u64,
    schedule: &StepSchedule<T>,
    options: &EstimatorOptions<T>,
    stream: RngStream,
) -> Result<EstimatorRun<T>> {
    let steps = ceil_count(pow::<T>(n, T::lit(2.0) * problem.info().weak_order))?;
    let sampler = EulerSampler::new(*problem.model(), n)?;
    let cfg = config(schedule, steps, start_point(problem, options), options);
    let run = run_sa_averaged(&sampler, problem, &cfg, &mut stream.rng())?;
    let estimate = run.averaged_theta.clone().expect("averaged run");
    Ok(EstimatorRun::from_single(
        Method::SaRp,
        run,
        estimate,
        stream,
    ))
}

/// Two-level (statistical Romberg) estimator.
pub fn sr_estimator<T: Scalar, P: RootProblem<T>>(
    problem: &P,
    n: u64,
    beta: T,
    schedule: &StepSchedule<T>,
    options: &EstimatorOptions<T>,
    stream: RngStream,
) -> Result<EstimatorRun<T>> {
    let info = problem.info();
    let (alpha, rho) = (info.weak_order, info.strong_order);
    check_two_level(alpha, rho, beta)?;
    if let (true, Some(lambda)) = (schedule.is_harmonic(), info.lambda_lower) {
        let bound = alpha / (T::lit(2.0) * alpha - T::lit(2.0) * rho * beta);
        if !(schedule.gamma0() * lambda > bound) {
            return Err(Error::config(
                "gamma0 lambda > alpha / (2 alpha - 2 rho beta)",
                format!(
                    "gamma0 lambda = {}, bound = {bound}",
                    schedule.gamma0() * lambda
                ),
            ));
        }
    }
    let nb = coarse_bias(n, beta);
    if nb > n {
        return Err(Error::domain(format!("coarse bias {nb} exceeds n = {n}")));
    }
    let (m1, m2) = sr_steps(n, alpha, rho, beta, schedule)?;
    let theta0 = start_point(problem, options);

    let coarse = EulerSampler::new(*problem.model(), nb)?;
    let first = run_sa(
        &coarse,
        problem,
        &config(schedule, m1, theta0.clone(), options),
        &mut stream.child(0).rng(),
    )?;
    let start = if options.warm_start {
        first.final_theta.clone()
    } else {
        theta0
    };
    let estimate = first.final_theta.clone();
    let mut out = EstimatorRun::from_single(Method::Sr, first, estimate, stream);

    let pair_sampler = CoupledEulerSampler::new(*problem.model(), nb, n)?;
    let pair = run_coupled_sa(
        &pair_sampler,
        problem,
        &config(schedule, m2, start, options),
        false,
        &mut stream.child(1).rng(),
    )?;
    out.add_level(&pair, nb, n, m2);
    Ok(out)
}

/// Two-level estimator with iterate averaging on both stages.
pub fn sr_rp_estimator<T: Scalar, P: RootProblem<T>>(
    problem: &P,
    n: u64,
    beta: T,
    schedule: &StepSchedule<T>,
    options: &EstimatorOptions<T>,
    stream: RngStream,
) -> Result<EstimatorRun<T>> {
    let info = problem.info();
    let (alpha, rho) = (info.weak_order, info.strong_order);
    check_two_level(alpha, rho, beta)?;
    let bound = sr_rp_exponent_bound(alpha, rho, beta);
    if !(schedule.is_slow() && schedule.exponent() > bound) {
        return Err(Error::config(
            "a in (1/2,1) and a > max(alpha/(2alpha-2rho beta), alpha(1-beta)/(alpha-rho beta))",
            format!("a = {}, bound = {bound}", schedule.exponent()),
        ));
    }
    let nb = coarse_bias(n, beta);
    let (m3, m4) = sr_rp_steps(n, alpha, rho, beta)?;
    let theta0 = start_point(problem, options);

    let coarse = EulerSampler::new(*problem.model(), nb)?;
    let first = run_sa_averaged(
        &coarse,
        problem,
        &config(schedule, m3, theta0.clone(), options),
        &mut stream.child(0).rng(),
    )?;
    let first_avg = first.averaged_theta.clone().expect("averaged run");
    let start = if options.warm_start {
        first_avg.clone()
    } else {
        theta0
    };
    let mut out = EstimatorRun::from_single(Method::SrRp, first, first_avg, stream);

    let pair_sampler = CoupledEulerSampler::new(*problem.model(), nb, n)?;
    let pair = run_coupled_sa(
        &pair_sampler,
        problem,
        &config(schedule, m4, start, options),
        true,
        &mut stream.child(1).rng(),
    )?;
    out.add_level(&pair, nb, n, m4);
    Ok(out)
}

/// Lower bound on the step exponent `a` for the averaged two-level estimator.
pub fn sr_rp_exponent_bound<T: Scalar>(alpha: T, rho: T, beta: T) -> T {
    let two = T::lit(2.0);
    let first = alpha / (two * alpha - two * rho * beta);
    let second = alpha * (T::one() - beta) / (alpha - rho * beta);
    first.max(second)
}

/// Multi-level estimator over the biases `1, m, …, m^L`.
pub fn ml_estimator<T: Scalar, P: RootProblem<T>>(
    problem: &P,
    allocation: &LevelAllocation,
    schedule: &StepSchedule<T>,
    options: &EstimatorOptions<T>,
    stream: RngStream,
) -> Result<EstimatorRun<T>> {
    let theta0 = start_point(problem, options);
    let base = EulerSampler::new(*problem.model(), 1)?;
    let first = run_sa(
        &base,
        problem,
        &config(schedule, allocation.m0, theta0.clone(), options),
        &mut stream.child(0).rng(),
    )?;
    let estimate = first.final_theta.clone();
    let mut out = EstimatorRun::from_single(Method::Ml, first, estimate, stream);

    for (i, &steps) in allocation.steps.iter().enumerate() {
        let level = i as u32 + 1;
        let (nc, nf) = allocation.level_biases(level);
        let start = if options.warm_start {
            out.estimate.clone()
        } else {
            theta0.clone()
        };
        let sampler = CoupledEulerSampler::new(*problem.model(), nc, nf)?;
        let pair = run_coupled_sa(
            &sampler,
            problem,
            &config(schedule, steps, start, options),
            false,
            &mut stream.child(level as u64).rng(),
        )?;
        out.add_level(&pair, nc, nf, steps);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn harmonic(g: f64) -> StepSchedule<f64> {
        StepSchedule::harmonic(g).unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            Method::Sa,
            Method::SaRp,
            Method::Sr,
            Method::SrRp,
            Method::Ml,
        ] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("mlmc".parse::<Method>().is_err());
    }

    #[test]
    fn beta_star_values() {
        assert_relative_eq!(beta_star(0.5).unwrap(), 0.5);
        assert_relative_eq!(beta_star(0.25).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(beta_star(1e-12).unwrap(), 1.0, epsilon = 1e-10);
        assert!(beta_star(0.0).is_err());
        assert!(beta_star(0.6).is_err());
    }

    #[test]
    fn step_budgets() {
        assert_eq!(sa_steps(100, 1.0, &harmonic(200.0)).unwrap(), 2_000_000);
        let (m1, m2) = sr_steps(256, 1.0, 0.5, 0.5, &harmonic(2.0)).unwrap();
        assert_eq!(m1, 2 * 256 * 256);
        // γ₀ n^{3/2}
        assert_eq!(m2, 2 * 4096);
        assert_eq!(sr_rp_steps(16, 1.0, 0.5, 0.5).unwrap(), (256, 64));
        assert_eq!(sr_rp_steps(1, 1.0, 0.5, 0.5).unwrap(), (1, 1));
        assert_relative_eq!(
            sr_rp_exponent_bound(1.0, 0.5, 0.5),
            2.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn complexity_formulas() {
        let s = harmonic(2.0);
        for n in [16u64, 64, 256] {
            let nf = n as f64;
            assert_relative_eq!(complexity_sa(n, 1.0, &s).unwrap(), 2.0 * nf.powi(3));
            // 2 n^{5/2} + 2 n^2 + 2 n^{5/2} for a perfect square
            let sr = complexity_sr(n, 1.0, 0.5, 0.5, &s).unwrap();
            assert_relative_eq!(sr, 4.0 * nf.powf(2.5) + 2.0 * nf * nf, max_relative = 1e-12);
        }
    }

    #[test]
    fn allocation_reference_values() {
        let s = harmonic(2.0);
        let a = ml_allocation(256, 4, &s, 1.0, 0.5, false).unwrap();
        assert_eq!(a.levels, 4);
        assert_eq!(a.m0, 131_072);
        for (l, &ml) in a.steps.iter().enumerate() {
            let l = l as i32 + 1;
            let want =
                (2.0 * 256f64.powi(2) * 256f64.ln() * 3.0 / (4f64.powi(l) * 4f64.ln())).ceil();
            assert_eq!(ml as f64, want);
        }
        // log 256 / log 4 = 4, so M_1 = 131072 · 3 · 4 / 4
        assert_eq!(a.steps[0], 393_216);
        assert!(a.steps.windows(2).all(|w| w[0] > w[1]));
        let reduced = ml_allocation(256, 4, &s, 1.0, 0.5, true).unwrap();
        assert!(reduced.m0 > a.m0);
    }

    #[test]
    fn single_level_allocation() {
        let s = harmonic(2.0);
        let a = ml_allocation(8, 8, &s, 1.0, 0.5, false).unwrap();
        assert_eq!(a.levels, 1);
        assert_eq!(a.m0, 128);
        // log m / log n = 1 leaves M_1 = γ₀ n² (m − 1)/m
        assert_eq!(a.steps, vec![112]);
    }

    #[test]
    fn allocation_errors() {
        let s = harmonic(2.0);
        assert!(ml_allocation(100, 4, &s, 1.0, 0.5, false).is_err());
        assert!(ml_allocation(1, 4, &s, 1.0, 0.5, false).is_err());
        assert!(ml_allocation(256, 1, &s, 1.0, 0.5, false).is_err());
        assert!(ml_allocation(169, 13, &s, 1.0, 0.5, false).is_err());
        assert!(matches!(
            ml_allocation(256, 4, &s, 0.8, 0.5, false),
            Err(Error::Config { .. })
        ));
        assert_eq!(exact_level_count(243, 3), Some(5));
        assert_eq!(exact_level_count(256, 3), None);
    }

    #[test]
    fn rough_allocation_scales_as_claimed() {
        // C_ML = O(n^{2α} n^{1−2ρ}) for ρ < 1/2
        let s = harmonic(2.0);
        let cost =
            |n: u64| complexity_ml::<f64>(&ml_allocation(n, 2, &s, 1.0, 0.25, false).unwrap());
        let slope = (cost(1 << 16) / cost(1 << 12)).ln() / ((1u64 << 4) as f64).ln();
        assert!((slope - 2.5).abs() < 0.1, "{slope}");
        let a = ml_allocation(1 << 10, 2, &s, 1.0, 0.25, false).unwrap();
        assert!(a.steps.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn ml_cost_is_quasi_quadratic() {
        let s = harmonic(2.0);
        for n in [64u64, 256, 1024] {
            let a = ml_allocation(n, 4, &s, 1.0, 0.5, false).unwrap();
            let nf = n as f64;
            let closed =
                2.0 * (nf * nf + nf * nf * nf.ln().powi(2) * 15.0 / (4.0 * 4f64.ln().powi(2)));
            assert_relative_eq!(complexity_ml::<f64>(&a), closed, max_relative = 1e-3);
            assert!(complexity_ml::<f64>(&a) < complexity_sa(n, 1.0, &s).unwrap());
        }
    }

    #[test]
    fn clt_variance() {
        assert_relative_eq!(scalar_clt_variance(1.0, 2.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(scalar_clt_variance(1.0, 1.0, 0.5).unwrap(), 1.0);
        assert!(scalar_clt_variance(0.5, 1.0, 0.5).is_err());
        assert_relative_eq!(schedule_zeta(&harmonic(4.0)), 0.125);
        assert_eq!(schedule_zeta(&StepSchedule::new(1.0, 0.75).unwrap()), 0.0);
    }

    #[test]
    fn coarse_bias_rounding() {
        assert_eq!(coarse_bias(256, 0.5), 16);
        assert_eq!(coarse_bias(100, 0.5), 10);
        assert_eq!(coarse_bias(2, 0.5), 1);
        assert_eq!(coarse_bias(1000, 1e-9), 1);
    }
}
