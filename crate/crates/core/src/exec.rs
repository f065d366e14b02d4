//! Execution strategy for embarrassingly parallel sweeps.

use alloc::vec::Vec;

/// Evaluates `f(0..n)` and returns the results in index order.
///
/// Implementations may run cells concurrently but must return them in index
/// order; every reduction in this crate happens afterwards, sequentially, so
/// results are bit-identical across executors.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every cell on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
