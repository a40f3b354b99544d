use polysle::verify::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Ensemble members on a fixed-size rayon pool. Results come back in index
/// order, so reports do not depend on the thread count.
pub struct PoolExecutor {
    pool: ThreadPool,
}

impl PoolExecutor {
    /// `threads == 0` uses the available parallelism.
    pub fn new(threads: usize) -> PoolExecutor {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        PoolExecutor { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn map_indexed<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        self.pool.install(|| (0..count).into_par_iter().map(&job).collect())
    }
}
