//! Replica execution backends.
//!
//! `map_indexed` fans a per-index job over `0..n` and collects results in
//! index order. With the `parallel` feature the work runs on the rayon pool;
//! without it the same jobs run sequentially. Jobs must be deterministic
//! functions of their index (seed derivation via [`crate::rng::derive_seed`])
//! so the two backends produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `job` over `0..n`, parallel when the `parallel` feature is enabled.
pub fn map_indexed<T, F>(n: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_par(n, job)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, job)
    }
}

/// Sequential backend. Always available; used by the bench suite as the
/// baseline for the parallel/sequential comparison.
pub fn map_indexed_seq<T, F>(n: usize, job: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(job).collect()
}

/// Rayon backend.
#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, F>(n: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(job).collect()
}
