//! Geometric Brownian motion: exact terminal law, Euler-Maruyama terminal
//! values, and coarse/fine pairs driven by one Brownian path.
//!
//! Coupling works on the union of the two time grids `{iT/n_c}` and
//! `{jT/n_f}`. Independent Gaussian increments are drawn on every union
//! sub-interval and summed into the cells of each scheme, so the pair has the
//! exact joint law for any `n_c ≤ n_f`, whether or not `n_c` divides `n_f`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `dX = r X dt + σ X dW`, `X_0 = x0`, observed at `horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmModel<T> {
    pub x0: T,
    pub r: T,
    pub sigma: T,
    pub horizon: T,
}

impl<T: Scalar> GbmModel<T> {
    /// `σ = 0` is accepted and gives a deterministic model.
    pub fn new(x0: T, r: T, sigma: T, horizon: T) -> Result<Self> {
        let finite = x0.is_finite() && r.is_finite() && sigma.is_finite() && horizon.is_finite();
        if !finite || x0 <= T::zero() || sigma < T::zero() || horizon <= T::zero() {
            return Err(Error::domain(format!(
                "invalid GBM parameters x0={x0}, r={r}, sigma={sigma}, T={horizon}"
            )));
        }
        Ok(Self {
            x0,
            r,
            sigma,
            horizon,
        })
    }

    /// `x0 = 100`, `r = 0.05`, `σ = 0.4`, `T = 1`.
    pub fn reference() -> Self {
        Self {
            x0: T::lit(100.0),
            r: T::lit(0.05),
            sigma: T::lit(0.4),
            horizon: T::one(),
        }
    }

    /// Drift of `log X_T`: `(r − σ²/2) T`.
    pub fn log_drift(&self) -> T {
        (self.r - self.sigma * self.sigma / T::lit(2.0)) * self.horizon
    }

    /// Standard deviation of `log X_T`: `σ √T`.
    pub fn log_vol(&self) -> T {
        self.sigma * self.horizon.sqrt()
    }

    /// Exact `X_T` for a standard normal `z`.
    pub fn exact_terminal(&self, z: T) -> T {
        self.x0 * (self.log_drift() + self.log_vol() * z).exp()
    }

    /// Exact `X_T` for a Brownian displacement `W_T`.
    pub fn exact_from_displacement(&self, w_t: T) -> T {
        self.x0 * (self.log_drift() + self.sigma * w_t).exp()
    }

    /// Euler-Maruyama terminal value on `n = increments.len()` equal steps.
    pub fn euler_terminal(&self, n: u64, increments: &[T]) -> Result<T> {
        if n == 0 || increments.len() as u64 != n {
            return Err(Error::domain(format!(
                "expected {n} Brownian increments, got {}",
                increments.len()
            )));
        }
        let dt = self.horizon / T::from_count(n);
        let drift = self.r * dt;
        Ok(increments
            .iter()
            .fold(self.x0, |x, &dw| euler_step(x, drift, self.sigma, dw)))
    }

    /// Coarse, fine and exact terminal values from one Brownian path.
    pub fn coupled_terminal<R: Rng + ?Sized>(
        &self,
        n_coarse: u64,
        n_fine: u64,
        rng: &mut R,
    ) -> Result<CoupledTerminalSample<T>> {
        check_levels(n_coarse, n_fine)?;
        Ok(walk_union_grid(self, n_coarse, n_fine, rng, |_| {}))
    }

    /// Like [`coupled_terminal`](Self::coupled_terminal) but also returns every increment drawn.
    pub fn coupled_increments<R: Rng + ?Sized>(
        &self,
        n_coarse: u64,
        n_fine: u64,
        rng: &mut R,
    ) -> Result<CoupledIncrements<T>> {
        check_levels(n_coarse, n_fine)?;
        let mut union = Vec::new();
        let mut coarse = Vec::with_capacity(n_coarse as usize);
        let mut fine = Vec::with_capacity(n_fine as usize);
        let sample = walk_union_grid(self, n_coarse, n_fine, rng, |ev| match ev {
            GridEvent::Union(dw) => union.push(dw),
            GridEvent::Coarse(dw) => coarse.push(dw),
            GridEvent::Fine(dw) => fine.push(dw),
        });
        Ok(CoupledIncrements {
            sample,
            union,
            coarse,
            fine,
        })
    }

    /// Monte Carlo estimate of `E|X_T^n − X_T|²` and its standard error.
    pub fn strong_error_mse<R: Rng + ?Sized>(
        &self,
        n: u64,
        paths: u64,
        rng: &mut R,
    ) -> Result<(T, T)> {
        if n == 0 || paths == 0 {
            return Err(Error::domain("strong error needs n ≥ 1 and paths ≥ 1"));
        }
        let mut acc = crate::stats::Moments::new();
        for _ in 0..paths {
            let s = walk_union_grid(self, n, n, rng, |_| {});
            let d = s.fine - s.exact;
            acc.push((d * d).as_f64());
        }
        Ok((T::lit(acc.mean()), T::lit(acc.std_error())))
    }
}

#[inline(always)]
fn euler_step<T: Scalar>(x: T, drift: T, sigma: T, dw: T) -> T {
    x * (T::one() + drift + sigma * dw)
}

fn check_levels(n_coarse: u64, n_fine: u64) -> Result<()> {
    if n_coarse == 0 || n_coarse > n_fine {
        return Err(Error::domain(format!(
            "coupled levels need 1 ≤ n_coarse ≤ n_fine, got {n_coarse} and {n_fine}"
        )));
    }
    Ok(())
}

/// Terminal values of two Euler schemes and the exact solution on one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledTerminalSample<T> {
    pub coarse: T,
    pub fine: T,
    pub exact: T,
    pub n_coarse: u64,
    pub n_fine: u64,
}

/// A coupled sample together with the increments that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledIncrements<T> {
    pub sample: CoupledTerminalSample<T>,
    /// Increments on the union grid, in time order.
    pub union: Vec<T>,
    /// Aggregated increment of each coarse cell.
    pub coarse: Vec<T>,
    /// Aggregated increment of each fine cell.
    pub fine: Vec<T>,
}

enum GridEvent<T> {
    Union(T),
    Coarse(T),
    Fine(T),
}

/// Walks the union grid once, streaming both Euler recursions.
///
/// Grid points are kept as integers on the common scale `n_c · n_f`, so
/// coincident points of the two grids are detected exactly.
///
/// Nested grids (`n_c` dividing `n_f`) skip the merge.
#[inline]
fn walk_union_grid<T: Scalar, R: Rng + ?Sized>(
    model: &GbmModel<T>,
    n_coarse: u64,
    n_fine: u64,
    rng: &mut R,
    mut observe: impl FnMut(GridEvent<T>),
) -> CoupledTerminalSample<T> {
    let horizon = model.horizon;
    let drift_c = model.r * horizon / T::from_count(n_coarse);
    let drift_f = model.r * horizon / T::from_count(n_fine);

    let mut x_c = model.x0;
    let mut x_f = model.x0;
    let mut w_total = T::zero();

    if n_coarse == n_fine {
        let sd = (horizon / T::from_count(n_fine)).sqrt();
        for _ in 0..n_fine {
            let dw = sd * T::standard_normal(rng);
            observe(GridEvent::Union(dw));
            observe(GridEvent::Fine(dw));
            observe(GridEvent::Coarse(dw));
            w_total += dw;
            x_f = euler_step(x_f, drift_f, model.sigma, dw);
            x_c = euler_step(x_c, drift_c, model.sigma, dw);
        }
    } else if n_fine.is_multiple_of(n_coarse) {
        let ratio = n_fine / n_coarse;
        let sd = (horizon / T::from_count(n_fine)).sqrt();
        for _ in 0..n_coarse {
            let mut acc_c = T::zero();
            for _ in 0..ratio {
                let dw = sd * T::standard_normal(rng);
                observe(GridEvent::Union(dw));
                observe(GridEvent::Fine(dw));
                acc_c += dw;
                x_f = euler_step(x_f, drift_f, model.sigma, dw);
            }
            observe(GridEvent::Coarse(acc_c));
            w_total += acc_c;
            x_c = euler_step(x_c, drift_c, model.sigma, acc_c);
        }
    } else {
        let total = n_coarse * n_fine;
        let scale = horizon / T::from_count(total);
        let (mut next_c, mut next_f) = (n_fine, n_coarse);
        let (mut acc_c, mut acc_f) = (T::zero(), T::zero());
        let mut pos = 0u64;
        while pos < total {
            let next = next_c.min(next_f);
            let dw = (scale * T::from_count(next - pos)).sqrt() * T::standard_normal(rng);
            observe(GridEvent::Union(dw));
            acc_c += dw;
            acc_f += dw;
            w_total += dw;
            if next == next_f {
                observe(GridEvent::Fine(acc_f));
                x_f = euler_step(x_f, drift_f, model.sigma, acc_f);
                acc_f = T::zero();
                next_f += n_coarse;
            }
            if next == next_c {
                observe(GridEvent::Coarse(acc_c));
                x_c = euler_step(x_c, drift_c, model.sigma, acc_c);
                acc_c = T::zero();
                next_c += n_fine;
            }
            pos = next;
        }
    }

    CoupledTerminalSample {
        coarse: x_c,
        fine: x_f,
        exact: model.exact_from_displacement(w_total),
        n_coarse,
        n_fine,
    }
}

/// Source of i.i.d. innovations for a single SA chain.
pub trait TerminalSampler<T>: Sync {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T;
    /// Euler sub-steps consumed per draw.
    fn cost(&self) -> u64;
}

/// Source of coupled (coarse, fine) innovations for a correction pair.
pub trait CoupledSampler<T>: Sync {
    fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (T, T);
    /// Euler sub-steps per draw charged to the coarse member.
    fn coarse_cost(&self) -> u64;
    /// Euler sub-steps per draw charged to the fine member.
    fn fine_cost(&self) -> u64;
    fn cost(&self) -> u64 {
        self.coarse_cost() + self.fine_cost()
    }
}

/// `X_T^n` from an `n`-step Euler scheme.
#[derive(Debug, Clone, Copy)]
pub struct EulerSampler<T> {
    model: GbmModel<T>,
    n: u64,
    drift: T,
    sd: T,
}

impl<T: Scalar> EulerSampler<T> {
    pub fn new(model: GbmModel<T>, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("Euler scheme needs n ≥ 1"));
        }
        let dt = model.horizon / T::from_count(n);
        Ok(Self {
            model,
            n,
            drift: model.r * dt,
            sd: dt.sqrt(),
        })
    }

    pub fn steps(&self) -> u64 {
        self.n
    }
}

impl<T: Scalar> TerminalSampler<T> for EulerSampler<T> {
    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let mut x = self.model.x0;
        for _ in 0..self.n {
            let dw = self.sd * T::standard_normal(rng);
            x = euler_step(x, self.drift, self.model.sigma, dw);
        }
        x
    }

    fn cost(&self) -> u64 {
        self.n
    }
}

/// Exact lognormal `X_T`. Counted as one unit of cost per draw.
#[derive(Debug, Clone, Copy)]
pub struct ExactSampler<T> {
    pub model: GbmModel<T>,
}

impl<T: Scalar> TerminalSampler<T> for ExactSampler<T> {
    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.model.exact_terminal(T::standard_normal(rng))
    }

    fn cost(&self) -> u64 {
        1
    }
}

/// `(X_T^{n_c}, X_T^{n_f})` on a shared Brownian path.
#[derive(Debug, Clone, Copy)]
pub struct CoupledEulerSampler<T> {
    model: GbmModel<T>,
    n_coarse: u64,
    n_fine: u64,
}

impl<T: Scalar> CoupledEulerSampler<T> {
    pub fn new(model: GbmModel<T>, n_coarse: u64, n_fine: u64) -> Result<Self> {
        check_levels(n_coarse, n_fine)?;
        Ok(Self {
            model,
            n_coarse,
            n_fine,
        })
    }

    pub fn levels(&self) -> (u64, u64) {
        (self.n_coarse, self.n_fine)
    }
}

impl<T: Scalar> CoupledSampler<T> for CoupledEulerSampler<T> {
    #[inline]
    fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (T, T) {
        let s = walk_union_grid(&self.model, self.n_coarse, self.n_fine, rng, |_| {});
        (s.coarse, s.fine)
    }

    fn coarse_cost(&self) -> u64 {
        self.n_coarse
    }

    fn fine_cost(&self) -> u64 {
        self.n_fine
    }
}
