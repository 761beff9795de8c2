//! Deterministic parallel map over sample indices.
//!
//! Results come back in index order, so any reduction done afterwards is
//! independent of the number of worker threads.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Evaluate `f(i)` for `i` in `0..n` on `workers` threads, returned in index order.
pub fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 {
        return Ok((0..n).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::ResourceExhausted(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// As [`map_indexed`] for fallible tasks; the first error by index wins.
pub fn try_map_indexed<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, workers, f)?.into_iter().collect()
}
