//! Thread-pool replicate executor. Results are collected by replicate index,
//! so reductions see the same sequence whatever the worker count.

use pressgame_core::exec::{Executor, Job, Sample};
use pressgame_core::Result;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

pub struct PoolExecutor {
    pool: ThreadPool,
}

impl PoolExecutor {
    /// A pool of `threads` workers; `None` uses the machine's parallelism.
    pub fn new(threads: Option<usize>) -> std::io::Result<Self> {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder.build().map_err(std::io::Error::other)?;
        Ok(PoolExecutor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn run(&self, n: usize, job: &Job<'_>) -> Vec<Result<Sample>> {
        self.pool.install(|| (0..n).into_par_iter().map(job).collect())
    }
}
