//! Gain sequences `γ(p) = γ₀ / pᵃ` and their integer inverse.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Power-law step schedule with `γ₀ > 0` and `a ∈ (1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule<T> {
    gamma0: T,
    exponent_a: T,
}

impl<T: Scalar> StepSchedule<T> {
    pub fn new(gamma0: T, exponent_a: T) -> Result<Self> {
        if !(gamma0 > T::zero() && gamma0.is_finite()) {
            return Err(Error::domain(format!(
                "gamma0 must be positive, got {gamma0}"
            )));
        }
        if !(exponent_a > T::lit(0.5) && exponent_a <= T::one()) {
            return Err(Error::domain(format!(
                "step exponent must lie in (1/2, 1], got {exponent_a}"
            )));
        }
        Ok(Self { gamma0, exponent_a })
    }

    /// `γ(p) = γ₀ / p`.
    pub fn harmonic(gamma0: T) -> Result<Self> {
        Self::new(gamma0, T::one())
    }

    pub fn gamma0(&self) -> T {
        self.gamma0
    }

    pub fn exponent(&self) -> T {
        self.exponent_a
    }

    /// True for `a = 1`, the regime that needs `2λγ₀ > 1`.
    pub fn is_harmonic(&self) -> bool {
        self.exponent_a == T::one()
    }

    /// True for `a ∈ (1/2, 1)`, the regime used with iterate averaging.
    pub fn is_slow(&self) -> bool {
        self.exponent_a < T::one()
    }

    #[inline]
    fn eval(&self, p: u64) -> T {
        let p = T::from_count(p);
        if self.is_harmonic() {
            self.gamma0 / p
        } else {
            self.gamma0 / p.powf(self.exponent_a)
        }
    }

    /// Gain at step `p ≥ 1`.
    pub fn gamma(&self, p: u64) -> Result<T> {
        if p == 0 {
            return Err(Error::domain("step index must be at least 1"));
        }
        Ok(self.eval(p))
    }

    /// Gain at step `p`, with `p = 0` treated as `p = 1`. For hot loops.
    #[inline]
    pub fn gamma_at(&self, p: u64) -> T {
        self.eval(p.max(1))
    }

    /// Smallest step count `p ≥ 1` with `γ(p) ≤ y`.
    pub fn gamma_inv(&self, y: T) -> Result<u64> {
        if !(y > T::zero()) {
            return Err(Error::domain(format!("gamma_inv needs y > 0, got {y}")));
        }
        if y >= self.eval(1) {
            return Ok(1);
        }
        let guess = (self.gamma0 / y).powf(T::one() / self.exponent_a).ceil();
        let mut p = guess
            .to_u64()
            .ok_or_else(|| Error::domain(format!("step count for y = {y} overflows")))?
            .max(1);
        // the closed form can be off by one either way after rounding
        while self.eval(p) > y {
            p += 1;
        }
        while p > 1 && self.eval(p - 1) <= y {
            p -= 1;
        }
        Ok(p)
    }

    /// `(HS2)`: `2 λ γ₀ > 1` for the harmonic schedule.
    pub fn validate_hs2(&self, lambda_lower: T) -> bool {
        T::lit(2.0) * lambda_lower * self.gamma0 > T::one()
    }
}
