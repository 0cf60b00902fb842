//! Pluggable execution of independent jobs.
//!
//! Monte Carlo loops in this crate are written as "map job index to result".
//! [`Serial`] runs them in order on the calling thread; a threaded executor
//! can be supplied by the caller and must return results in index order.

use alloc::vec::Vec;

pub trait Executor {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}
