// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use super::{ExperimentError, PointFailure, PointResult};
use crate::integrate::SolverStats;

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "TRION_THREADS";

/// Worker count: `TRION_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => available,
    }
}

pub(crate) struct PointBatch {
    pub values: Vec<f64>,
    pub stats: SolverStats,
    pub failures: Vec<PointFailure>,
}

/// Evaluates `f(0..n)` on `threads` workers; slot `k` always holds point `k`.
pub(crate) fn run_points<F>(n: usize, threads: usize, f: F) -> PointBatch
where
    F: Fn(usize) -> Result<PointResult, ExperimentError> + Sync + Send,
{
    let results: Vec<Result<PointResult, ExperimentError>> = if threads <= 1 {
        (0..n).map(&f).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(&f).collect(),
        }
    };
    let mut batch = PointBatch { values: Vec::with_capacity(n), stats: SolverStats::default(), failures: Vec::new() };
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => {
                batch.values.push(p.signal);
                batch.stats.merge(&p.stats);
            }
            Err(e) => {
                batch.values.push(f64::NAN);
                batch.failures.push(PointFailure { index, message: e.to_string() });
            }
        }
    }
    batch
}
