use mlsa_core::stats::{shape_summary, Moments, ShapeSummary};
use mlsa_core::Method;

use super::stream;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{num, Report, Scatter, Series, Table};
use crate::pool::replicate;
use crate::problem::{MethodSpec, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramResult {
    pub method: Method,
    pub n: u64,
    /// `n · (Θ_k − θ*)` per replication.
    pub errors: Vec<f64>,
    pub mean: f64,
    pub std_dev: f64,
    /// `None` when fewer than three samples or zero spread.
    pub summary: Option<ShapeSummary>,
    pub mean_cost: f64,
}

impl HistogramResult {
    pub fn standardized(&self) -> Vec<f64> {
        if self.summary.is_none() {
            return vec![f64::NAN; self.errors.len()];
        }
        self.errors
            .iter()
            .map(|e| (e - self.mean) / self.std_dev)
            .collect()
    }
}

pub const HEADER: [&str; 5] = ["method", "n", "rep", "scaled_error", "standardized"];
pub const SUMMARY_HEADER: [&str; 10] = [
    "method",
    "n",
    "samples",
    "mean",
    "std_dev",
    "skewness",
    "excess_kurtosis",
    "ks_statistic",
    "degenerate",
    "mean_cost",
];

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<HistogramResult>> {
    let problem = Problem::from_config(cfg)?;
    let theta_star = problem.theta_star();
    let mut out = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        let spec = MethodSpec::new(cfg, method)?;
        for &n in &cfg.n_grid {
            let runs = replicate(threads, cfg.reps, |rep| {
                let run = spec.run(&problem, n, stream(cfg.seed, rep, mi as u64, n))?;
                Ok((n as f64 * (run.estimate[0] - theta_star), run.total_cost))
            })?;
            let errors: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let m: Moments = errors.iter().copied().collect();
            out.push(HistogramResult {
                method,
                n,
                mean: m.mean(),
                std_dev: m.std_dev(),
                summary: shape_summary(&errors),
                mean_cost: runs.iter().map(|r| r.1 as f64).sum::<f64>() / runs.len() as f64,
                errors,
            });
        }
    }
    Ok(out)
}

pub fn report(results: &[HistogramResult]) -> Report {
    let mut table = Table::new(&HEADER);
    let mut summary = Table::new(&SUMMARY_HEADER);
    let mut warnings = Vec::new();
    let mut series = Vec::new();
    for r in results {
        let z = r.standardized();
        for (k, (e, s)) in r.errors.iter().zip(&z).enumerate() {
            table.push(vec![
                r.method.to_string(),
                r.n.to_string(),
                k.to_string(),
                num(*e),
                num(*s),
            ]);
        }
        let (skew, kurt, ks) = r
            .summary
            .as_ref()
            .map_or((f64::NAN, f64::NAN, f64::NAN), |s| {
                (s.skewness, s.excess_kurtosis, s.ks_statistic)
            });
        if r.summary.is_none() {
            warnings.push(format!(
                "{} n={}: degenerate sample ({} values, sd {}); no normality summary",
                r.method,
                r.n,
                r.errors.len(),
                r.std_dev
            ));
        }
        summary.push(vec![
            r.method.to_string(),
            r.n.to_string(),
            r.errors.len().to_string(),
            num(r.mean),
            num(r.std_dev),
            num(skew),
            num(kurt),
            num(ks),
            (r.summary.is_none()).to_string(),
            num(r.mean_cost),
        ]);
        if r.summary.is_some() {
            series.push(Series {
                label: format!("{} n={}", r.method, r.n),
                points: density(&z, 30),
            });
        }
    }
    let mut rep = Report::new("histogram", table);
    rep.extra.push(("summary", summary));
    rep.warnings = warnings;
    rep.plot = Some(Scatter {
        title: "Standardized error density".into(),
        x_label: "standardized error".into(),
        y_label: "density".into(),
        log_x: false,
        log_y: false,
        series,
    });
    rep
}

/// Histogram of `z` on `[-4, 4]` as (bin center, density) points.
fn density(z: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = (-4.0, 4.0);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in z {
        if v >= lo && v < hi {
            counts[((v - lo) / width) as usize] += 1;
        }
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            (
                lo + (i as f64 + 0.5) * width,
                c as f64 / (z.len() as f64 * width),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_integrates_to_one() {
        let z: Vec<f64> = (0..1000).map(|i| -3.0 + 6.0 * i as f64 / 1000.0).collect();
        let d = density(&z, 16);
        let total: f64 = d.iter().map(|p| p.1 * 0.5).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
