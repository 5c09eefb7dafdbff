use mlsa_core::estimators::{complexity_ml, ml_allocation, ml_estimator};
use mlsa_core::problems::RootProblem;
use mlsa_core::StepSchedule;

use super::stream;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{num, Report, Scatter, Series, Table};
use crate::pool::replicate;
use crate::problem::{MethodSpec, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct MSweepRow {
    pub m: u64,
    pub n_target: u64,
    /// Power of `m` closest to `n_target` on a log scale.
    pub n_used: u64,
    pub levels: u32,
    pub rounded: bool,
    /// Formula complexity at `n_used`.
    pub complexity: f64,
    /// Complexity carried to `n_target` along `n² log² n`.
    pub scaled_complexity: f64,
    pub rmse: Option<f64>,
}

pub const HEADER: [&str; 8] = [
    "m",
    "n_target",
    "n_used",
    "levels",
    "rounded",
    "complexity",
    "scaled_complexity",
    "rmse",
];

/// `m^L` (L ≥ 1) nearest to `n` in log scale, ties to the smaller power.
pub fn nearest_power(n: u64, m: u64) -> Result<(u64, u32)> {
    if m < 2 || n < 2 {
        return Err(HarnessError::config(
            "m >= 2 and n >= 2",
            format!("m = {m}, n = {n}"),
        ));
    }
    let target = (n as f64).ln();
    let mut best = (m, 1u32);
    let (mut power, mut levels) = (m, 1u32);
    loop {
        if (target - (power as f64).ln()).abs() < (target - (best.0 as f64).ln()).abs() {
            best = (power, levels);
        }
        if power as f64 > n as f64 * m as f64 {
            break;
        }
        match power.checked_mul(m) {
            Some(p) => power = p,
            None => break,
        }
        levels += 1;
    }
    Ok(best)
}

/// Formula columns of one sweep row.
pub fn formula_row(n_target: u64, m: u64, schedule: &StepSchedule) -> Result<MSweepRow> {
    let (n_used, levels) = nearest_power(n_target, m)?;
    let alloc = ml_allocation(n_used, m, schedule, 1.0, 0.5, false)?;
    let complexity = complexity_ml::<f64>(&alloc);
    let (nt, nu) = (n_target as f64, n_used as f64);
    let scale = (nt / nu).powi(2) * (nt.ln() / nu.ln()).powi(2);
    Ok(MSweepRow {
        m,
        n_target,
        n_used,
        levels,
        rounded: n_used != n_target,
        complexity,
        scaled_complexity: complexity * scale,
        rmse: None,
    })
}

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<MSweepRow>> {
    let problem = Problem::from_config(cfg)?;
    let theta_star = problem.theta_star();
    let spec = MethodSpec::new(cfg, mlsa_core::Method::Ml)?;
    let info = problem.info();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        for &m in &cfg.m_sweep {
            let mut row = formula_row(n, m, &spec.schedule)?;
            if !cfg.formula_only {
                let alloc = ml_allocation(
                    row.n_used,
                    m,
                    &spec.schedule,
                    info.weak_order,
                    info.strong_order,
                    false,
                )?;
                let errs = replicate(threads, cfg.reps, |rep| {
                    let run = ml_estimator(
                        &problem,
                        &alloc,
                        &spec.schedule,
                        &spec.options,
                        stream(cfg.seed, rep, m, n),
                    )?;
                    Ok(run.estimate[0] - theta_star)
                })?;
                row.rmse =
                    Some((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt());
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn report(rows: &[MSweepRow]) -> Report {
    let mut table = Table::new(&HEADER);
    for r in rows {
        table.push(vec![
            r.m.to_string(),
            r.n_target.to_string(),
            r.n_used.to_string(),
            r.levels.to_string(),
            r.rounded.to_string(),
            num(r.complexity),
            num(r.scaled_complexity),
            r.rmse.map(num).unwrap_or_default(),
        ]);
    }
    let mut targets: Vec<u64> = rows.iter().map(|r| r.n_target).collect();
    targets.dedup();
    let series = targets
        .iter()
        .map(|&n| Series {
            label: format!("n={n}"),
            points: rows
                .iter()
                .filter(|r| r.n_target == n)
                .map(|r| (r.m as f64, r.scaled_complexity))
                .collect(),
        })
        .collect();
    let mut rep = Report::new("m-sweep", table);
    rep.warnings = rows
        .iter()
        .filter(|r| r.rounded)
        .map(|r| {
            format!(
                "m={}: n={} is not a power of m, used {}",
                r.m, r.n_target, r.n_used
            )
        })
        .collect();
    rep.plot = Some(Scatter {
        title: "Multi-level complexity versus m".into(),
        x_label: "m".into(),
        y_label: "complexity scaled to n".into(),
        log_x: false,
        log_y: false,
        series,
    });
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_powers() {
        assert_eq!(nearest_power(256, 2).unwrap(), (256, 8));
        assert_eq!(nearest_power(256, 3).unwrap(), (243, 5));
        assert_eq!(nearest_power(256, 4).unwrap(), (256, 4));
        assert_eq!(nearest_power(256, 7).unwrap(), (343, 3));
        assert_eq!(nearest_power(3, 12).unwrap(), (12, 1));
        assert!(nearest_power(256, 1).is_err());
    }

    #[test]
    fn exact_power_is_not_scaled() {
        let s = StepSchedule::harmonic(1.0).unwrap();
        let r = formula_row(256, 2, &s).unwrap();
        assert!(!r.rounded);
        assert_eq!(r.levels, 8);
        assert_eq!(r.complexity, r.scaled_complexity);
        assert!(formula_row(256, 3, &s).unwrap().rounded);
    }
}
