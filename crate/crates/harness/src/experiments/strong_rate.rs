use mlsa_core::stats::regression_slope;

use super::{stream, Sums, BLOCK};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{num, Report, Scatter, Series, Table};
use crate::pool::replicate;

#[derive(Debug, Clone, PartialEq)]
pub struct StrongRateRow {
    pub n: u64,
    /// `E|X_T^n − X_T|²`.
    pub mse: f64,
    pub se: f64,
    pub paths: u64,
}

pub const HEADER: [&str; 4] = ["n", "mse", "se", "paths"];

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<StrongRateRow>> {
    let model = cfg.model;
    let paths = cfg.reps;
    cfg.n_grid
        .iter()
        .map(|&n| {
            let blocks = replicate(threads, paths.div_ceil(BLOCK), |b| {
                let mut rng = stream(cfg.seed, b, 0, n).rng();
                let mut acc = Sums::default();
                for _ in 0..BLOCK.min(paths - b * BLOCK) {
                    let s = model.coupled_terminal(n, n, &mut rng)?;
                    acc.push((s.fine - s.exact).powi(2));
                }
                Ok(acc)
            })?;
            let total = Sums::merge(&blocks);
            Ok(StrongRateRow {
                n,
                mse: total.mean(),
                se: total.std_error(),
                paths,
            })
        })
        .collect()
}

/// Least-squares slope of `log mse` against `log n`.
pub fn slope(rows: &[StrongRateRow]) -> f64 {
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mse.ln()).collect();
    regression_slope(&x, &y)
}

pub fn report(rows: &[StrongRateRow]) -> Report {
    let mut table = Table::new(&HEADER);
    for r in rows {
        table.push(vec![
            r.n.to_string(),
            num(r.mse),
            num(r.se),
            r.paths.to_string(),
        ]);
    }
    let mut fit = Table::new(&["quantity", "value"]);
    if rows.len() >= 2 {
        fit.push(vec!["slope".into(), num(slope(rows))]);
    }
    let mut rep = Report::new("strong-rate", table);
    rep.extra.push(("fit", fit));
    rep.plot = Some(Scatter {
        title: "Strong error of the Euler scheme".into(),
        x_label: "n".into(),
        y_label: "E|X^n − X|²".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: "mse".into(),
            points: rows.iter().map(|r| (r.n as f64, r.mse)).collect(),
        }],
    });
    rep
}
