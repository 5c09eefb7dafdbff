//! The five experiments. Each returns typed rows and can render them as a [`Report`].

pub mod frontier;
pub mod histogram;
pub mod m_sweep;
pub mod strong_rate;
pub mod weak_error;

use mlsa_core::RngStream;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::output::Report;
use crate::pool::worker_count;

/// Stream of replication `rep` within the sub-experiment `(a, b)`.
///
/// The stream id is the replication index; the sub-experiment re-keys the seed.
pub fn stream(seed: u64, rep: u64, a: u64, b: u64) -> RngStream {
    RngStream::new(seed, rep).child((a << 32) | (b & 0xffff_ffff))
}

/// Draw and path counts are split into blocks of this size, one stream each.
pub(crate) const BLOCK: u64 = 10_000;

/// Sum, sum of squares and count of a block of draws.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Sums {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl Sums {
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    /// Combines blocks in the given order.
    pub fn merge(blocks: &[Sums]) -> Sums {
        blocks.iter().fold(Sums::default(), |acc, b| Sums {
            sum: acc.sum + b.sum,
            sum_sq: acc.sum_sq + b.sum_sq,
            count: acc.count + b.count,
        })
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn std_error(&self) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return f64::NAN;
        }
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Runs the experiment selected in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let threads = worker_count(cfg.threads)?;
    match cfg.experiment {
        Experiment::WeakError => Ok(weak_error::report(&weak_error::run(cfg, threads)?)),
        Experiment::Histogram => Ok(histogram::report(&histogram::run(cfg, threads)?)),
        Experiment::Frontier => Ok(frontier::report(&frontier::run(cfg, threads)?)),
        Experiment::MSweep => Ok(m_sweep::report(&m_sweep::run(cfg, threads)?)),
        Experiment::StrongRate => Ok(strong_rate::report(&strong_rate::run(cfg, threads)?)),
    }
}
