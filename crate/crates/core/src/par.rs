//! Replicate-level parallelism.
//!
//! Results always come back ordered by replicate index, so downstream
//! reductions see the same sequence whatever the thread count. With the
//! `parallel` feature disabled the same functions run sequentially.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0..count)` sequentially.
pub fn map_replicates_seq<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_replicates_par<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Evaluates `f(0..count)`, in parallel when the `parallel` feature is on.
pub fn map_replicates<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_replicates_par(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_replicates_seq(count, f)
    }
}

/// Like [`map_replicates`] but stops at the lowest-indexed error.
pub fn try_map_replicates<T, F>(count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    map_replicates(count, f).into_iter().collect()
}

/// Runs `f` on a pool with `threads` workers (0 = library default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
