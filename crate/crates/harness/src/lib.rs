//! Experiment runner for the `mlsa-core` estimators.
//!
//! Every experiment fans replications out over a bounded worker pool; each
//! replication owns its random stream and results are reduced in index
//! order, so output does not depend on the number of workers.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod pool;
pub mod problem;

pub use config::{Beta, Cli, Experiment, ExperimentConfig, ProblemKind};
pub use error::{HarnessError, Result};
pub use experiments::run;
pub use output::{Report, Table};
