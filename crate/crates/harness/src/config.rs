use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use mlsa_core::{GbmModel, Method};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    WeakError,
    Histogram,
    Frontier,
    MSweep,
    StrongRate,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WeakError => "weak-error",
            Self::Histogram => "histogram",
            Self::Frontier => "frontier",
            Self::MSweep => "m-sweep",
            Self::StrongRate => "strong-rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Quantile,
    CallLevel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Auto,
    Value(f64),
}

impl std::str::FromStr for Beta {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Beta::Auto);
        }
        s.parse::<f64>()
            .map(Beta::Value)
            .map_err(|_| format!("expected a real number or 'auto', got '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        s == Switch::On
    }
}

/// Command line of the `mlsa` binary.
#[derive(Debug, Parser)]
#[command(
    name = "mlsa",
    version,
    about = "Multi-level stochastic approximation experiments"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[arg(long, value_enum, default_value = "quantile")]
    pub problem: ProblemKind,
    /// Bias parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
    /// Replications (histogram, weak-error), targets (frontier) or paths (strong-rate).
    #[arg(long)]
    pub reps: Option<u64>,
    /// Estimators, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub method: Vec<Method>,
    /// Level ratio of the multi-level estimator.
    #[arg(long, default_value_t = 4)]
    pub m: u64,
    /// Level ratios visited by m-sweep.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
    pub m_sweep: Vec<u64>,
    #[arg(long, default_value = "auto")]
    pub beta: Beta,
    /// Defaults to 200 for quantile and 2 for call-level.
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "on")]
    pub warm_start: Switch,
    /// Defaults to on for call-level, off for quantile.
    #[arg(long, value_enum)]
    pub freeze: Option<Switch>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// SA steps for the weak-error root estimate.
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    /// Monte Carlo draws for the weak-error field estimate.
    #[arg(long, default_value_t = 1_000_000)]
    pub mc: u64,
    /// Quantile level.
    #[arg(long, default_value_t = 0.7)]
    pub level: f64,
    /// Call-level target strike outside the frontier sweep.
    #[arg(long, default_value_t = 100.0)]
    pub target: f64,
    #[arg(long, default_value_t = 100.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.05)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.4)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Frontier: independent runs per target.
    #[arg(long, default_value_t = 1)]
    pub per_target: u64,
    /// m-sweep: report formula complexities only.
    #[arg(long)]
    pub formula_only: bool,
    /// Skip the SVG plot.
    #[arg(long)]
    pub no_svg: bool,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: mlsa_core::Error| e.to_string())
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub problem: ProblemKind,
    pub n_grid: Vec<u64>,
    pub reps: u64,
    pub methods: Vec<Method>,
    pub m: u64,
    pub m_sweep: Vec<u64>,
    pub beta: Beta,
    pub gamma0: f64,
    pub exponent_a: f64,
    pub seed: u64,
    pub warm_start: bool,
    pub freeze: bool,
    pub out_dir: PathBuf,
    pub steps: u64,
    pub mc: u64,
    pub level: f64,
    pub target: f64,
    pub model: GbmModel,
    /// Worker cap; `None` reads `MLSA_THREADS`.
    pub threads: Option<usize>,
    pub svg: bool,
    pub formula_only: bool,
    pub per_target: u64,
}

impl ExperimentConfig {
    /// Paper defaults for `experiment` on `problem`.
    pub fn new(experiment: Experiment, problem: ProblemKind) -> Self {
        let (n_grid, reps, methods): (Vec<u64>, u64, Vec<Method>) = match experiment {
            Experiment::WeakError => (vec![16, 32, 64], 8, vec![Method::Sa]),
            Experiment::Histogram => (vec![64], 1000, vec![Method::Sa]),
            Experiment::Frontier => (vec![64, 256], 50, vec![Method::Sa, Method::Sr, Method::Ml]),
            Experiment::MSweep => (vec![256], 50, vec![Method::Ml]),
            Experiment::StrongRate => (vec![8, 16, 32, 64, 128], 100_000, vec![]),
        };
        Self {
            experiment,
            problem,
            n_grid,
            reps,
            methods,
            m: 4,
            m_sweep: (2..=7).collect(),
            beta: Beta::Auto,
            gamma0: default_gamma0(problem),
            exponent_a: 1.0,
            seed: 1,
            warm_start: true,
            freeze: problem == ProblemKind::CallLevel,
            out_dir: PathBuf::from("out"),
            steps: 1_000_000,
            mc: 1_000_000,
            level: 0.7,
            target: 100.0,
            model: GbmModel::reference(),
            threads: None,
            svg: true,
            formula_only: false,
            per_target: 1,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self> {
        let mut cfg = Self::new(cli.experiment, cli.problem);
        if !cli.n.is_empty() {
            cfg.n_grid = cli.n;
        }
        if let Some(reps) = cli.reps {
            cfg.reps = reps;
        }
        if !cli.method.is_empty() {
            cfg.methods = cli.method;
        }
        cfg.m = cli.m;
        cfg.m_sweep = cli.m_sweep;
        cfg.beta = cli.beta;
        if let Some(g) = cli.gamma0 {
            cfg.gamma0 = g;
        }
        cfg.exponent_a = cli.a;
        cfg.seed = cli.seed;
        cfg.warm_start = cli.warm_start.into();
        if let Some(f) = cli.freeze {
            cfg.freeze = f.into();
        }
        cfg.out_dir = cli.out;
        cfg.steps = cli.steps;
        cfg.mc = cli.mc;
        cfg.level = cli.level;
        cfg.target = cli.target;
        cfg.model = GbmModel::new(cli.x0, cli.rate, cli.sigma, cli.horizon)?;
        cfg.svg = !cli.no_svg;
        cfg.formula_only = cli.formula_only;
        cfg.per_target = cli.per_target;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(HarnessError::config(
                "n_grid nonempty, n >= 1",
                format!("{:?}", self.n_grid),
            ));
        }
        if self.reps == 0 || self.per_target == 0 {
            return Err(HarnessError::config(
                "reps >= 1",
                format!("reps = {}, per_target = {}", self.reps, self.per_target),
            ));
        }
        if let Beta::Value(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return Err(HarnessError::config("beta in (0,1)", format!("got {b}")));
            }
        }
        if self.experiment == Experiment::Frontier && self.problem != ProblemKind::CallLevel {
            return Err(HarnessError::config(
                "frontier needs --problem call-level",
                "the target sweep is defined for the call-level problem",
            ));
        }
        if matches!(
            self.experiment,
            Experiment::Histogram | Experiment::Frontier
        ) && self.methods.is_empty()
        {
            return Err(HarnessError::config(
                "at least one method",
                "--method is empty",
            ));
        }
        Ok(())
    }

    /// Resolved two-level exponent.
    pub fn beta_value(&self) -> f64 {
        match self.beta {
            Beta::Auto => mlsa_core::estimators::beta_star(0.5).expect("valid rho"),
            Beta::Value(b) => b,
        }
    }
}

pub fn default_gamma0(problem: ProblemKind) -> f64 {
    match problem {
        ProblemKind::Quantile => 200.0,
        ProblemKind::CallLevel => 2.0,
    }
}
