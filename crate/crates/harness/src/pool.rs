use rayon::prelude::*;

use crate::error::{HarnessError, Result};

/// Worker count: `requested`, else `MLSA_THREADS`, else all cores.
pub fn worker_count(requested: Option<usize>) -> Result<usize> {
    if let Some(t) = requested {
        return Ok(t.max(1));
    }
    match std::env::var("MLSA_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(HarnessError::config(
                "MLSA_THREADS >= 1",
                format!("got '{v}'"),
            )),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `job(0..count)` on at most `threads` workers. Results come back in
/// index order regardless of scheduling.
pub fn replicate<T, F>(threads: usize, count: u64, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if threads <= 1 {
        return (0..count).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::config("worker pool", e.to_string()))?;
    pool.install(|| (0..count).into_par_iter().map(&job).collect::<Vec<_>>())
        .into_iter()
        .collect()
}
