use csrx_core::exec::Executor;
use rayon::prelude::*;

/// Runs jobs on the rayon pool; results keep job order, so output matches
/// [`csrx_core::exec::Serial`] exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(job).collect()
    }
}
