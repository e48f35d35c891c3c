//! Index-sharded map used by the Monte-Carlo drivers.
//!
//! Each task is pure given its index, so the parallel and sequential builds
//! produce byte-identical results; only wall-clock time differs.

#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
