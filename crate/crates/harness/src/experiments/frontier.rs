use std::time::Instant;

use mlsa_core::estimators::{
    complexity_ml, complexity_sa, complexity_sr, ml_allocation, sr_rp_steps,
};
use mlsa_core::Method;

use super::stream;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{num, Report, Scatter, Series, Table};
use crate::pool::replicate;
use crate::problem::{MethodSpec, Problem};

pub const TARGET_RANGE: (f64, f64) = (90.0, 110.0);

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub method: Method,
    pub n: u64,
    pub rmse: f64,
    /// Formula complexity in Euler sub-steps.
    pub complexity: f64,
    /// Measured sub-steps per estimator run, averaged over runs.
    pub measured_cost: u64,
    pub wall_seconds: f64,
}

pub const HEADER: [&str; 6] = [
    "method",
    "n",
    "rmse",
    "complexity",
    "measured_cost",
    "wall_seconds",
];

/// `count` targets equidistributed on `[lo, hi]`.
pub fn targets(count: u64) -> Vec<f64> {
    let (lo, hi) = TARGET_RANGE;
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Formula complexity of one run of `spec` at bias `n`.
pub fn formula_complexity(spec: &MethodSpec, n: u64) -> Result<f64> {
    let s = &spec.schedule;
    let nf = n as f64;
    Ok(match spec.method {
        Method::Sa => complexity_sa(n, 1.0, s)?,
        Method::SaRp => nf * (nf * nf).ceil(),
        Method::Sr => complexity_sr(n, 1.0, 0.5, spec.beta, s)?,
        Method::SrRp => {
            let (m3, m4) = sr_rp_steps(n, 1.0, 0.5, spec.beta)?;
            let nb = nf.powf(spec.beta);
            nb * m3 as f64 + (nf + nb) * m4 as f64
        }
        Method::Ml => complexity_ml::<f64>(&ml_allocation(n, spec.m, s, 1.0, 0.5, false)?),
    })
}

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<FrontierPoint>> {
    let goals = targets(cfg.reps);
    let problems = goals
        .iter()
        .map(|&t| Problem::call_level(cfg.model, t))
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        let spec = MethodSpec::new(cfg, method)?;
        for &n in &cfg.n_grid {
            let complexity = formula_complexity(&spec, n)?;
            let start = Instant::now();
            let total = goals.len() as u64 * cfg.per_target;
            let runs = replicate(threads, total, |k| {
                let p = &problems[(k % goals.len() as u64) as usize];
                let run = spec.run(p, n, stream(cfg.seed, k, mi as u64, n))?;
                Ok((run.estimate[0] - p.theta_star(), run.total_cost))
            })?;
            let wall_seconds = start.elapsed().as_secs_f64();
            let mse = runs.iter().map(|r| r.0 * r.0).sum::<f64>() / runs.len() as f64;
            let cost: u64 = runs.iter().map(|r| r.1).sum();
            points.push(FrontierPoint {
                method,
                n,
                rmse: mse.sqrt(),
                complexity,
                measured_cost: cost / runs.len() as u64,
                wall_seconds,
            });
        }
    }
    Ok(points)
}

pub fn report(points: &[FrontierPoint]) -> Report {
    let mut table = Table::new(&HEADER);
    for p in points {
        table.push(vec![
            p.method.to_string(),
            p.n.to_string(),
            num(p.rmse),
            num(p.complexity),
            p.measured_cost.to_string(),
            num(p.wall_seconds),
        ]);
    }
    let mut methods: Vec<Method> = points.iter().map(|p| p.method).collect();
    methods.dedup();
    let series = methods
        .iter()
        .map(|&m| Series {
            label: m.to_string(),
            points: points
                .iter()
                .filter(|p| p.method == m)
                .map(|p| (p.rmse, p.measured_cost as f64))
                .collect(),
        })
        .collect();
    let mut rep = Report::new("frontier", table);
    rep.plot = Some(Scatter {
        title: "Complexity versus RMSE".into(),
        x_label: "RMSE".into(),
        y_label: "complexity (Euler sub-steps)".into(),
        log_x: true,
        log_y: true,
        series,
    });
    rep
}

/// Cost of `method` at `rmse`, interpolated log-log between its frontier points.
///
/// `None` when `rmse` lies outside the method's measured range.
pub fn cost_at(points: &[FrontierPoint], method: Method, rmse: f64) -> Option<f64> {
    let mut pts: Vec<&FrontierPoint> = points.iter().filter(|p| p.method == method).collect();
    pts.sort_by(|a, b| a.rmse.total_cmp(&b.rmse));
    if let Some(p) = pts.iter().find(|p| p.rmse == rmse) {
        return Some(p.measured_cost as f64);
    }
    let log = |p: &FrontierPoint| (p.rmse.ln(), (p.measured_cost as f64).ln());
    let x = rmse.ln();
    pts.windows(2)
        .map(|w| (log(w[0]), log(w[1])))
        .find(|(a, b)| a.0 <= x && x <= b.0)
        .map(|(a, b)| (a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1)).exp())
}

/// Smallest RMSE reached by every method in `points`.
pub fn smallest_common_rmse(points: &[FrontierPoint]) -> Option<f64> {
    let mut methods: Vec<Method> = points.iter().map(|p| p.method).collect();
    methods.sort_by_key(|m| m.as_str());
    methods.dedup();
    methods
        .iter()
        .map(|&m| {
            points
                .iter()
                .filter(|p| p.method == m)
                .map(|p| p.rmse)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        })
}
