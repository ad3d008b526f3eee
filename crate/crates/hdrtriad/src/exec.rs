//! Frame fan-out: workers run pure per-frame tasks, one reducer consumes
//! the results in input order so outputs do not depend on worker count.

use anyhow::{Context, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

pub fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().context("starting worker pool")
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Maps `task` over `items` in parallel chunks and feeds each result to
/// `reduce` in item order. Chunking bounds how many results are alive at
/// once.
pub fn ordered<I, T, F, R>(pool: &ThreadPool, items: &[I], task: F, mut reduce: R)
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
    R: FnMut(&I, T),
{
    let chunk = pool.current_num_threads() * 2;
    for part in items.chunks(chunk.max(1)) {
        let results: Vec<T> = pool.install(|| part.par_iter().map(&task).collect());
        for (item, r) in part.iter().zip(results) {
            reduce(item, r);
        }
    }
}
