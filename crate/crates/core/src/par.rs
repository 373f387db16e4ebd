//! Data-parallel helpers.
//!
//! With the `parallel` feature these fan out over rayon's global pool (or
//! whichever pool the caller `install`s); without it they run sequentially.
//! Results are always collected in index order and reduced sequentially, so
//! the output does not depend on the thread count.

/// Below this many items the helpers stay on the calling thread.
const MIN_PARALLEL_LEN: usize = 48;

#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    if n < MIN_PARALLEL_LEN {
        return (0..n).map(f).collect();
    }
    (0..n).into_par_iter().with_min_len(16).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Ordered sum of `f(i)` over `0..n`.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).iter().sum()
}

/// Collects `f(i)` for `0..n`, stopping at the first error in index order.
pub fn try_map_range<R, E, F>(n: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Whether the crate was built with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
