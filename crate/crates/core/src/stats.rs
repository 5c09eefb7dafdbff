//! Sample statistics used by the diagnostics and experiments.

use crate::normal::normal_cdf;

/// Streaming mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two points.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::new();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Shape summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov-Smirnov distance of the standardized sample to N(0,1).
    pub ks_statistic: f64,
}

/// Moments and KS distance; `None` when fewer than 3 points or zero spread.
pub fn shape_summary(xs: &[f64]) -> Option<ShapeSummary> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if !(m2 > 0.0) {
        return None;
    }
    let std_dev = (m2 * nf / (nf - 1.0)).sqrt();
    let mut z: Vec<f64> = xs.iter().map(|x| (x - mean) / std_dev).collect();
    Some(ShapeSummary {
        n,
        mean,
        std_dev,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        ks_statistic: ks_against_normal(&mut z),
    })
}

/// `sup |F_n − Φ|` of a sample; sorts the slice in place.
pub fn ks_against_normal(z: &mut [f64]) -> f64 {
    z.sort_by(|a, b| a.total_cmp(b));
    let nf = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = normal_cdf(x);
            let hi = (i + 1) as f64 / nf - cdf;
            let lo = cdf - i as f64 / nf;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, -2.0, 7.5, 3.25];
        let m: Moments = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert_relative_eq!(m.mean(), mean, epsilon = 1e-14);
        assert_relative_eq!(m.variance(), var, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_sample_has_zero_skew() {
        let s = shape_summary(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        assert_relative_eq!(s.skewness, 0.0, epsilon = 1e-14);
        // uniform-like: platykurtic
        assert!(s.excess_kurtosis < 0.0);
    }

    #[test]
    fn degenerate_samples() {
        assert!(shape_summary(&[1.0, 2.0]).is_none());
        assert!(shape_summary(&[3.0, 3.0, 3.0, 3.0]).is_none());
    }

    #[test]
    fn slope_and_correlation() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert_relative_eq!(regression_slope(&x, &y), 2.0, epsilon = 1e-14);
        assert_relative_eq!(correlation(&x, &y), 1.0, epsilon = 1e-14);
    }
}
