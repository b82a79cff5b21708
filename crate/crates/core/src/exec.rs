//! Replicate execution. The core runs replicates in order; the `pressgame`
//! crate supplies a thread-pool executor. Either way results come back
//! indexed by replicate, so reductions happen in a fixed order.

use alloc::vec::Vec;

use crate::error::Result;

/// Scalar outcome of one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub blocked_rate_max: f64,
}

pub type Job<'a> = dyn Fn(usize) -> Result<Sample> + Sync + 'a;

pub trait Executor: Sync {
    /// Run `job(0..n)`; element `r` of the output is the result of replicate `r`.
    fn run(&self, n: usize, job: &Job<'_>) -> Vec<Result<Sample>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run(&self, n: usize, job: &Job<'_>) -> Vec<Result<Sample>> {
        (0..n).map(job).collect()
    }
}
