use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use sidecode_core::stats::{Sequential, TrialRunner};

/// Runs trials on a dedicated rayon pool, or inline for one thread.
///
/// Failures are summed as integers, so the count does not depend on the
/// number of threads or on scheduling.
pub struct Runner {
    pool: Option<ThreadPool>,
}

impl Runner {
    /// `threads == 0` uses one worker per core.
    pub fn new(threads: usize) -> Self {
        if threads == 1 {
            return Self { pool: None };
        }
        let pool = ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        Self { pool: Some(pool) }
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, ThreadPool::current_num_threads)
    }

    /// Maps `f` over `0..count` in parallel, keeping index order.
    pub fn map<T: Send>(&self, count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        match &self.pool {
            None => (0..count).map(f).collect(),
            Some(p) => p.install(|| (0..count).into_par_iter().map(f).collect()),
        }
    }
}

impl TrialRunner for Runner {
    fn count_failures(&self, trials: u64, trial: &(dyn Fn(u64) -> sidecode_core::Result<bool> + Sync)) -> sidecode_core::Result<u64> {
        match &self.pool {
            None => Sequential.count_failures(trials, trial),
            Some(p) => p.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|i| trial(i).map(u64::from))
                    .try_reduce(|| 0, |a, b| Ok(a + b))
            }),
        }
    }
}
