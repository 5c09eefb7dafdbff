use mlsa_core::engine::{run_sa, Field};
use mlsa_core::problems::RootProblem;
use mlsa_core::sde::TerminalSampler;
use mlsa_core::{EulerSampler, FreezePolicy, SaConfig, StepSchedule};

use super::{stream, Sums, BLOCK};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{num, Report, Scatter, Series, Table};
use crate::pool::replicate;
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakErrorRow {
    pub n: u64,
    /// `n · ĥⁿ(θ*)`.
    pub nh: f64,
    pub se_h: f64,
    /// `n · (θ̂^{*,n} − θ*)`, `θ̂^{*,n}` the mean of `reps` runs of `steps` SA steps.
    pub ntheta: f64,
    pub se_theta: f64,
    pub steps: u64,
    pub reps: u64,
}

pub const HEADER: [&str; 7] = ["n", "nh", "ntheta", "se_h", "se_theta", "steps", "reps"];

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<WeakErrorRow>> {
    let problem = Problem::from_config(cfg)?;
    let theta_star = problem.theta_star();
    let schedule = StepSchedule::new(cfg.gamma0, cfg.exponent_a)?;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let sampler = EulerSampler::new(*problem.model(), n)?;
        let nf = n as f64;

        let blocks = cfg.mc.div_ceil(BLOCK);
        let h = Sums::merge(&replicate(threads, blocks, |b| {
            let mut rng = stream(cfg.seed, b, 0, n).rng();
            let mut acc = Sums::default();
            let mut out = [0.0];
            for _ in 0..BLOCK.min(cfg.mc - b * BLOCK) {
                problem.eval(&[theta_star], sampler.sample(&mut rng), &mut out);
                acc.push(out[0]);
            }
            Ok(acc)
        })?);

        let roots = replicate(threads, cfg.reps, |rep| {
            let mut sa = SaConfig::new(schedule, cfg.steps, problem.initial_theta());
            sa.freeze = cfg.freeze.then(FreezePolicy::default);
            let run = run_sa(
                &sampler,
                &problem,
                &sa,
                &mut stream(cfg.seed, rep, 1, n).rng(),
            )?;
            Ok(run.final_theta[0])
        })?;
        let mut theta = Sums::default();
        roots.iter().for_each(|&t| theta.push(t));

        rows.push(WeakErrorRow {
            n,
            nh: nf * h.mean(),
            se_h: nf * h.std_error(),
            ntheta: nf * (theta.mean() - theta_star),
            se_theta: nf * theta.std_error(),
            steps: cfg.steps,
            reps: cfg.reps,
        });
    }
    Ok(rows)
}

pub fn report(rows: &[WeakErrorRow]) -> Report {
    let mut table = Table::new(&HEADER);
    for r in rows {
        table.push(vec![
            r.n.to_string(),
            num(r.nh),
            num(r.ntheta),
            num(r.se_h),
            num(r.se_theta),
            r.steps.to_string(),
            r.reps.to_string(),
        ]);
    }
    let mut rep = Report::new("weak-error", table);
    rep.plot = Some(Scatter {
        title: "Weak and implicit discretization error".into(),
        x_label: "n".into(),
        y_label: "scaled error".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                label: "n h^n(θ*)".into(),
                points: rows.iter().map(|r| (r.n as f64, r.nh)).collect(),
            },
            Series {
                label: "n(θ*n − θ*)".into(),
                points: rows.iter().map(|r| (r.n as f64, r.ntheta)).collect(),
            },
        ],
    });
    rep
}
