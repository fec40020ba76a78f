//! Data-parallel inner loops with a sequential fallback.
//!
//! The heavy kernels (Bellman backups over the state space, CSI-alphabet
//! enumeration, sweep cells) all reduce to "map an index range through a pure
//! function and collect in order". With the `parallel` feature (default) the
//! map runs on the rayon pool; without it the map is a plain sequential loop.
//! Results are collected in index order either way, so both paths produce
//! identical output for pure `f`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `0..n` through `f`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `0..n` through `f`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    (0..n).map(f).collect()
}

/// Sequential reference version of [`map_indices`], always available.
pub fn seq_map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps `0..n` through `f` on at most `jobs` workers. `jobs <= 1` runs
/// sequentially even in parallel builds.
#[cfg(feature = "parallel")]
pub fn map_indices_bounded<T, F>(n: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    if jobs <= 1 {
        return seq_map_indices(n, f);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("failed to build bounded thread pool");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Maps `0..n` through `f` on at most `jobs` workers. `jobs <= 1` runs
/// sequentially even in parallel builds.
#[cfg(not(feature = "parallel"))]
pub fn map_indices_bounded<T, F>(n: usize, _jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    seq_map_indices(n, f)
}
