//! Reference root-finding problems on a GBM terminal value: the quantile of
//! `X_T` and the strike at which a European call reaches a given price.

use crate::engine::Field;
use crate::error::{Error, Result};
use crate::normal::{normal_cdf, normal_inv_cdf, normal_pdf};
use crate::scalar::Scalar;
use crate::sde::GbmModel;

/// Bracket half-width, relative to `θ*`, over which the mean-reversion
/// constant `λ` is taken as the infimum of `h'`.
pub const DEFAULT_LAMBDA_BRACKET: f64 = 0.01;

/// `1{x ≤ θ} − l`.
#[inline]
pub fn quantile_h<T: Scalar>(theta: T, x: T, level: T) -> T {
    if x <= theta {
        T::one() - level
    } else {
        -level
    }
}

/// `l − d · (x − θ)_+` with discount factor `d`.
#[inline]
pub fn call_level_h<T: Scalar>(theta: T, x: T, level: T, discount: T) -> T {
    level - discount * (x - theta).max(T::zero())
}

/// Closed-form `l`-quantile of `X_T`.
pub fn bs_quantile<T: Scalar>(model: &GbmModel<T>, level: T) -> Result<T> {
    let z = normal_inv_cdf(level)?;
    Ok(model.exact_terminal(z))
}

/// Discounted call value `e^{−rT} E(X_T − K)_+`.
pub fn bs_call<T: Scalar>(model: &GbmModel<T>, strike: T) -> Result<T> {
    if !(strike > T::zero()) {
        return Err(Error::domain(format!(
            "strike must be positive, got {strike}"
        )));
    }
    let (x0, k) = (model.x0.as_f64(), strike.as_f64());
    let (r, t) = (model.r.as_f64(), model.horizon.as_f64());
    let vol = model.log_vol().as_f64();
    let disc = (-r * t).exp();
    if vol == 0.0 {
        return Ok(T::lit((x0 - disc * k).max(0.0)));
    }
    let d1 = ((x0 / k).ln() + r * t + 0.5 * vol * vol) / vol;
    let d2 = d1 - vol;
    Ok(T::lit(x0 * normal_cdf(d1) - disc * k * normal_cdf(d2)))
}

/// Strike `K` with `bs_call(K) = price`, by bisection on `log K`.
pub fn invert_bs_call<T: Scalar>(model: &GbmModel<T>, price: T) -> Result<T> {
    let p = price.as_f64();
    let x0 = model.x0.as_f64();
    if !(p > 0.0 && p < x0) {
        return Err(Error::domain(format!(
            "call price must lie in (0, x0), got {p}"
        )));
    }
    let value = |k: f64| bs_call(model, T::lit(k)).map(|c| c.as_f64());
    let (mut lo, mut hi) = ((x0 * 1e-8).ln(), (x0 * 1e8).ln());
    if value(lo.exp())? < p || value(hi.exp())? > p {
        return Err(Error::domain(format!(
            "could not bracket a strike for call price {p}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if value(mid.exp())? > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit((0.5 * (lo + hi)).exp()))
}

/// Density of `X_T` at `x > 0`.
pub fn lognormal_pdf_at<T: Scalar>(model: &GbmModel<T>, x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain(format!(
            "lognormal density needs x > 0, got {x}"
        )));
    }
    let vol = model.log_vol().as_f64();
    if vol == 0.0 {
        return Err(Error::domain("lognormal density undefined for sigma = 0"));
    }
    let xf = x.as_f64();
    let z = ((xf / model.x0.as_f64()).ln() - model.log_drift().as_f64()) / vol;
    Ok(T::lit(normal_pdf(z) / (xf * vol)))
}

/// `P(X_T > x)`.
fn survival<T: Scalar>(model: &GbmModel<T>, x: f64) -> f64 {
    let vol = model.log_vol().as_f64();
    let fwd = model.x0.as_f64() * model.log_drift().as_f64().exp();
    if vol == 0.0 {
        return if fwd > x { 1.0 } else { 0.0 };
    }
    normal_cdf(((fwd / x).ln()) / vol)
}

/// Constants the estimators and variance predictions need from a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInfo<T> {
    pub theta_star: Option<Vec<T>>,
    /// Weak order `α`: `h^n − h = O(n^{−α})`.
    pub weak_order: T,
    /// Strong order `ρ`: `‖U^n − U‖₂ = O(n^{−ρ})`.
    pub strong_order: T,
    /// Lower bound `λ` on `h'` near the root, for the `a = 1` step condition.
    pub lambda_lower: Option<T>,
    /// `h'(θ*)`, scalar problems only.
    pub dh_at_star: Option<T>,
    /// `E[H(θ*, U)²]`, scalar problems only.
    pub gamma_at_star: Option<T>,
}

impl<T: Scalar> ProblemInfo<T> {
    /// Euler scheme orders for a smooth SDE: `α = 1`, `ρ = 1/2`.
    pub fn euler(theta_star: T) -> Self {
        Self {
            theta_star: Some(vec![theta_star]),
            weak_order: T::one(),
            strong_order: T::lit(0.5),
            lambda_lower: None,
            dh_at_star: None,
            gamma_at_star: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        if !(self.strong_order > T::zero() && self.strong_order <= half) {
            return Err(Error::domain(format!(
                "strong order must lie in (0, 1/2], got {}",
                self.strong_order
            )));
        }
        if !(self.weak_order > T::zero() && self.weak_order <= T::one()) {
            return Err(Error::domain(format!(
                "weak order must lie in (0, 1], got {}",
                self.weak_order
            )));
        }
        Ok(())
    }
}

/// A root-finding problem `E[H(θ, X_T)] = 0` on a GBM terminal value.
pub trait RootProblem<T: Scalar>: Field<T> {
    fn model(&self) -> &GbmModel<T>;
    fn info(&self) -> &ProblemInfo<T>;

    /// Starting point of every chain; the spot price by default.
    fn initial_theta(&self) -> Vec<T> {
        vec![self.model().x0; self.dim()]
    }
}

/// Quantile of `X_T` at level `l`: `H(θ, x) = 1{x ≤ θ} − l`.
#[derive(Debug, Clone)]
pub struct QuantileProblem<T> {
    model: GbmModel<T>,
    level: T,
    info: ProblemInfo<T>,
}

impl<T: Scalar> QuantileProblem<T> {
    pub fn new(model: GbmModel<T>, level: T) -> Result<Self> {
        Self::with_bracket(model, level, T::lit(DEFAULT_LAMBDA_BRACKET))
    }

    pub fn with_bracket(model: GbmModel<T>, level: T, bracket: T) -> Result<Self> {
        if !(level > T::zero() && level < T::one()) {
            return Err(Error::domain(format!(
                "quantile level must lie in (0,1), got {level}"
            )));
        }
        let theta_star = bs_quantile(&model, level)?;
        let mut info = ProblemInfo::euler(theta_star);
        if model.sigma > T::zero() {
            let dh = lognormal_pdf_at(&model, theta_star)?;
            let lo = lognormal_pdf_at(&model, theta_star * (T::one() - bracket))?;
            let hi = lognormal_pdf_at(&model, theta_star * (T::one() + bracket))?;
            info.dh_at_star = Some(dh);
            info.lambda_lower = Some(dh.min(lo).min(hi));
        }
        info.gamma_at_star = Some(level * (T::one() - level));
        Ok(Self { model, level, info })
    }

    pub fn level(&self) -> T {
        self.level
    }

    /// Levels outside `[0.05, 0.95]` converge slowly and erratically.
    pub fn is_extreme_level(&self) -> bool {
        self.level < T::lit(0.05) || self.level > T::lit(0.95)
    }

    /// Limit variance `l(1−l)/f(θ*)²` of the averaged estimator.
    pub fn averaged_variance(&self) -> Option<T> {
        let dh = self.info.dh_at_star?;
        Some(self.level * (T::one() - self.level) / (dh * dh))
    }
}

impl<T: Scalar> Field<T> for QuantileProblem<T> {
    fn dim(&self) -> usize {
        1
    }

    #[inline]
    fn eval(&self, theta: &[T], x: T, out: &mut [T]) {
        out[0] = quantile_h(theta[0], x, self.level);
    }
}

impl<T: Scalar> RootProblem<T> for QuantileProblem<T> {
    fn model(&self) -> &GbmModel<T> {
        &self.model
    }

    fn info(&self) -> &ProblemInfo<T> {
        &self.info
    }
}

/// Strike at which the discounted call price equals `l`:
/// `H(θ, x) = l − e^{−rT}(x − θ)_+`.
#[derive(Debug, Clone)]
pub struct CallLevelProblem<T> {
    model: GbmModel<T>,
    level: T,
    discount: T,
    info: ProblemInfo<T>,
}

impl<T: Scalar> CallLevelProblem<T> {
    /// Problem whose root is the strike priced at `level`.
    pub fn new(model: GbmModel<T>, level: T) -> Result<Self> {
        let theta_star = invert_bs_call(&model, level)?;
        Self::build(model, level, theta_star, T::lit(DEFAULT_LAMBDA_BRACKET))
    }

    /// Problem with prescribed root `θ*`; the level is `bs_call(θ*)`.
    pub fn from_target(model: GbmModel<T>, theta_star: T) -> Result<Self> {
        let level = bs_call(&model, theta_star)?;
        if !(level > T::zero()) {
            return Err(Error::domain(format!(
                "target {theta_star} gives a worthless call"
            )));
        }
        Self::build(model, level, theta_star, T::lit(DEFAULT_LAMBDA_BRACKET))
    }

    fn build(model: GbmModel<T>, level: T, theta_star: T, bracket: T) -> Result<Self> {
        let (r, t) = (model.r.as_f64(), model.horizon.as_f64());
        let disc = (-r * t).exp();
        let ts = theta_star.as_f64();
        let mut info = ProblemInfo::euler(theta_star);
        // h'(θ) = e^{−rT} P(X_T > θ) is decreasing, so its infimum sits at the top of the bracket
        info.dh_at_star = Some(T::lit(disc * survival(&model, ts)));
        info.lambda_lower = Some(T::lit(
            disc * survival(&model, ts * (1.0 + bracket.as_f64())),
        ));
        info.gamma_at_star = Some(T::lit(call_payoff_variance(&model, ts, disc)));
        Ok(Self {
            model,
            level,
            discount: T::lit(disc),
            info,
        })
    }

    pub fn level(&self) -> T {
        self.level
    }

    pub fn discount(&self) -> T {
        self.discount
    }
}

/// `Var(e^{−rT}(X_T − K)_+)`.
fn call_payoff_variance<T: Scalar>(model: &GbmModel<T>, k: f64, disc: f64) -> f64 {
    let x0 = model.x0.as_f64();
    let (r, t) = (model.r.as_f64(), model.horizon.as_f64());
    let vol = model.log_vol().as_f64();
    if vol == 0.0 {
        return 0.0;
    }
    let fwd = x0 * (r * t).exp();
    let d2 = ((x0 / k).ln() + model.log_drift().as_f64()) / vol;
    let second = x0 * x0 * ((2.0 * r * t) + vol * vol).exp() * normal_cdf(d2 + 2.0 * vol)
        - 2.0 * k * fwd * normal_cdf(d2 + vol)
        + k * k * normal_cdf(d2);
    let first = fwd * normal_cdf(d2 + vol) - k * normal_cdf(d2);
    disc * disc * (second - first * first)
}

impl<T: Scalar> Field<T> for CallLevelProblem<T> {
    fn dim(&self) -> usize {
        1
    }

    #[inline]
    fn eval(&self, theta: &[T], x: T, out: &mut [T]) {
        out[0] = call_level_h(theta[0], x, self.level, self.discount);
    }
}

impl<T: Scalar> RootProblem<T> for CallLevelProblem<T> {
    fn model(&self) -> &GbmModel<T> {
        &self.model
    }

    fn info(&self) -> &ProblemInfo<T> {
        &self.info
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> GbmModel<f64> {
        GbmModel::reference()
    }

    /// Simpson's rule on `[a, b]` with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn field_values() {
        assert_eq!(quantile_h(0.0, 1.0, 0.7), -0.7);
        assert_relative_eq!(quantile_h(1.0, 1.0, 0.7), 0.3, epsilon = 1e-15);
        assert_eq!(call_level_h(120.0, 100.0, 15.0, 1.0), 15.0);
        assert_eq!(call_level_h(0.0, 100.0, 15.0, 1.0), -85.0);
    }

    #[test]
    fn reference_quantile() {
        let m = reference();
        let q = bs_quantile(&m, 0.7).unwrap();
        assert!((q - 119.69).abs() < 0.005, "{q}");
        assert_relative_eq!(
            bs_quantile(&m, 0.5).unwrap(),
            100.0 * (-0.03f64).exp(),
            epsilon = 1e-10
        );
        let flat = GbmModel::new(100.0, 0.05, 1e-12, 1.0).unwrap();
        assert_relative_eq!(
            bs_quantile(&flat, 0.9).unwrap(),
            100.0 * 0.05f64.exp(),
            epsilon = 1e-8
        );
        assert!(bs_quantile(&m, 1.0).is_err());
        assert!(bs_quantile(&m, 0.0).is_err());
    }

    #[test]
    fn call_price_matches_quadrature() {
        let m = reference();
        let disc = (-0.05f64).exp();
        let oracle = |k: f64| {
            let lo = 100.0 * (-8.0f64 * 0.4).exp();
            let hi = 100.0 * (8.0f64 * 0.4).exp();
            disc * simpson(
                |x| (x - k).max(0.0) * lognormal_pdf_at(&m, x).unwrap(),
                k.max(lo),
                hi,
                200_000,
            )
        };
        // frozen from the quadrature oracle
        assert_relative_eq!(oracle(100.0), 18.022_951_45, epsilon = 1e-6);
        for k in [60.0, 100.0, 140.0] {
            assert_relative_eq!(bs_call(&m, k).unwrap(), oracle(k), epsilon = 1e-6);
        }
        assert_relative_eq!(
            bs_call(&m, 100.0).unwrap(),
            18.022_951_450_216_68,
            epsilon = 1e-9
        );
    }

    #[test]
    fn call_price_limits() {
        let m = reference();
        assert_relative_eq!(bs_call(&m, 1e-6).unwrap(), 100.0, epsilon = 1e-5);
        assert!(bs_call(&m, 1e6).unwrap() < 1e-12);
        assert!(bs_call(&m, 0.0).is_err());
        let mut prev = f64::INFINITY;
        for k in (10..400).map(|k| k as f64) {
            let c = bs_call(&m, k).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn quantile_increasing_in_level() {
        let m = reference();
        let mut prev = 0.0;
        for i in 1..100 {
            let q = bs_quantile(&m, i as f64 / 100.0).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn call_inversion_round_trip() {
        let m = reference();
        for k in (50..=200).step_by(5).map(|k| k as f64) {
            let l = bs_call(&m, k).unwrap();
            assert_relative_eq!(invert_bs_call(&m, l).unwrap(), k, epsilon = 1e-8);
        }
        assert!(invert_bs_call(&m, 0.0).is_err());
        assert!(invert_bs_call(&m, 100.0).is_err());
        let p = CallLevelProblem::new(m, bs_call(&m, 100.0).unwrap()).unwrap();
        assert_relative_eq!(
            p.info().theta_star.as_ref().unwrap()[0],
            100.0,
            epsilon = 1e-8
        );
    }

    #[test]
    fn density_integrates_to_one() {
        let m = reference();
        let lo = 100.0 * (-6.0f64 * 0.4).exp();
        let hi = 100.0 * (6.0f64 * 0.4).exp();
        let mass = simpson(|x| lognormal_pdf_at(&m, x).unwrap(), lo, hi, 100_000);
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        assert!(lognormal_pdf_at(&m, 0.0).is_err());
    }

    #[test]
    fn quantile_metadata() {
        let p = QuantileProblem::new(reference(), 0.7).unwrap();
        let info = p.info();
        assert_relative_eq!(info.gamma_at_star.unwrap(), 0.21, epsilon = 1e-15);
        assert!(info.dh_at_star.unwrap() > 0.0);
        assert_relative_eq!(
            info.dh_at_star.unwrap(),
            0.007_262_173_307_693,
            epsilon = 1e-12
        );
        assert!(info.lambda_lower.unwrap() <= info.dh_at_star.unwrap());
        assert_eq!(info.weak_order, 1.0);
        assert_eq!(info.strong_order, 0.5);
        assert!(!p.is_extreme_level());
        assert!(QuantileProblem::new(reference(), 0.01)
            .unwrap()
            .is_extreme_level());
        assert!(QuantileProblem::new(reference(), 1.2).is_err());
    }

    #[test]
    fn call_metadata_by_finite_differences() {
        let m = reference();
        let p = CallLevelProblem::from_target(m, 105.0).unwrap();
        let h = 1e-4;
        let fd = (bs_call(&m, 105.0 - h).unwrap() - bs_call(&m, 105.0 + h).unwrap()) / (2.0 * h);
        assert_relative_eq!(p.info().dh_at_star.unwrap(), fd, epsilon = 1e-7);
        // Var of discounted payoff by quadrature
        let disc = (-0.05f64).exp();
        let hi = 100.0 * (8.0f64 * 0.4).exp();
        let pdf = |x: f64| lognormal_pdf_at(&m, x).unwrap();
        let m1 = simpson(|x| disc * (x - 105.0) * pdf(x), 105.0, hi, 200_000);
        let m2 = simpson(
            |x| (disc * (x - 105.0)).powi(2) * pdf(x),
            105.0,
            hi,
            200_000,
        );
        assert_relative_eq!(
            p.info().gamma_at_star.unwrap(),
            m2 - m1 * m1,
            max_relative = 1e-6
        );
    }

    #[test]
    fn deterministic_call_level() {
        let flat = GbmModel::new(100.0, 0.05, 0.0, 1.0).unwrap();
        let p = CallLevelProblem::new(flat, 10.0).unwrap();
        let expected = (100.0 - 10.0) * 0.05f64.exp();
        assert_relative_eq!(
            p.info().theta_star.as_ref().unwrap()[0],
            expected,
            epsilon = 1e-8
        );
    }
}
