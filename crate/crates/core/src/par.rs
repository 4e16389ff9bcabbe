//! Block-parallel map-reduce.
//!
//! Work is always cut into numbered blocks whose boundaries depend only on the
//! problem, never on the worker count. Callers either collect the per-block
//! results in block order ([`map_blocks`]) and reduce them sequentially, or fold
//! them with a commutative integer reduction ([`fold_blocks`]). Both make the
//! outcome independent of scheduling.
//!
//! `Workers::new(1)` always takes the plain sequential path. Larger counts use a
//! dedicated rayon pool when the `parallel` feature is enabled and silently fall
//! back to the sequential path otherwise.

use std::num::NonZeroUsize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(NonZeroUsize);

impl Workers {
    pub fn new(n: usize) -> Result<Self> {
        NonZeroUsize::new(n).map(Workers).ok_or_else(|| LabError::argument("worker count must be at least 1"))
    }

    pub fn sequential() -> Self {
        Workers(NonZeroUsize::MIN)
    }

    /// One worker per available hardware thread.
    pub fn available() -> Self {
        Workers(std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN))
    }

    pub fn get(self) -> usize {
        self.0.get()
    }

    fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self.get() > 1
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::available()
    }
}

/// Evaluates `f(0..n_blocks)` and returns the results in block order.
pub fn map_blocks<T, F>(workers: Workers, n_blocks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if !workers.is_parallel() {
        return (0..n_blocks).map(f).collect();
    }
    parallel::map_blocks(workers.get(), n_blocks, f)
}

/// Folds every block into a worker-local accumulator and merges the accumulators.
///
/// `merge` must be commutative and associative for the result to be
/// deterministic; in this crate it is always integer addition.
pub fn fold_blocks<A, Id, F, M>(workers: Workers, n_blocks: usize, identity: Id, fold: F, merge: M) -> A
where
    A: Send,
    Id: Fn() -> A + Sync + Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    if !workers.is_parallel() {
        return (0..n_blocks).fold(identity(), fold);
    }
    parallel::fold_blocks(workers.get(), n_blocks, identity, fold, merge)
}

/// Pairwise (cascade) summation over a slice in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(feature = "parallel")]
mod parallel {
    use rayon::prelude::*;

    fn pool(threads: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("failed to build rayon pool")
    }

    pub(super) fn map_blocks<T, F>(threads: usize, n_blocks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        pool(threads).install(|| (0..n_blocks).into_par_iter().map(f).collect())
    }

    pub(super) fn fold_blocks<A, Id, F, M>(threads: usize, n_blocks: usize, identity: Id, fold: F, merge: M) -> A
    where
        A: Send,
        Id: Fn() -> A + Sync + Send,
        F: Fn(A, usize) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        pool(threads).install(|| (0..n_blocks).into_par_iter().fold(&identity, fold).reduce(&identity, merge))
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    pub(super) fn map_blocks<T, F>(_threads: usize, n_blocks: usize, f: F) -> Vec<T>
    where
        F: Fn(usize) -> T,
    {
        (0..n_blocks).map(f).collect()
    }

    pub(super) fn fold_blocks<A, Id, F, M>(_threads: usize, n_blocks: usize, identity: Id, fold: F, _merge: M) -> A
    where
        Id: Fn() -> A,
        F: Fn(A, usize) -> A,
    {
        (0..n_blocks).fold(identity(), fold)
    }
}

/// Number of blocks of size `block` needed to cover `len` items.
pub(crate) fn block_count(len: u64, block: u64) -> usize {
    len.div_ceil(block) as usize
}
