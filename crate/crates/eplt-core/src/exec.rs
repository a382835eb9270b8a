//! Deterministic map helpers over index ranges.
//!
//! Monte-Carlo ensembles, optimizer restarts and verification sweeps are all
//! embarrassingly parallel: each task derives its own seed from a base seed
//! and a task index, and results are collected in index order so the output
//! is identical whichever backend runs it. The `parallel` feature (default)
//! routes [`run_indexed`] through rayon; without it the same call runs
//! sequentially. [`run_indexed_seq`] is always available so benchmarks can
//! compare the two paths directly.

/// Sequential reference path.
pub fn run_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    (0..n).map(f).collect()
}

/// Parallel path (rayon). Output order matches index order.
#[cfg(feature = "parallel")]
pub fn run_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Dispatches to rayon when the `parallel` feature is enabled, otherwise
/// runs sequentially. Results are in index order either way.
pub fn run_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        run_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_indexed_seq(n, f)
    }
}

/// Derive a per-task seed from a base seed. SplitMix64 step keeps seeds
/// decorrelated even for consecutive indices.
pub fn task_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
