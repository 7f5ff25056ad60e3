//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these fan work out over the current
//! rayon pool; without it they run the same closures sequentially. Callers
//! only ever produce per-index results, and any reduction over them happens
//! afterwards in index order, so output is bitwise identical in both builds
//! and for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..n` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Calls `f(row_index, row)` for each `width`-long row of `data`.
pub fn for_each_row_mut<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(width).enumerate().for_each(|(y, row)| f(y, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(width).enumerate().for_each(|(y, row)| f(y, row));
    }
}

/// Worker-count configuration for the engine's parallel sections.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Workers {
    threads: Option<usize>,
}

impl Workers {
    /// Use the global pool (all cores).
    pub fn all() -> Self {
        Self { threads: None }
    }

    /// Use exactly `n` workers (`n = 1` is effectively sequential).
    pub fn fixed(n: usize) -> Self {
        Self { threads: Some(n.max(1)) }
    }

    pub fn count(&self) -> Option<usize> {
        self.threads
    }

    /// Runs `op` with this worker configuration in effect.
    pub fn install<R, OP>(&self, op: OP) -> R
    where
        R: Send,
        OP: FnOnce() -> R + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if let Some(n) = self.threads {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    return pool.install(op);
                }
                log::warn!("could not build a {n}-thread pool, using the global pool");
            }
            op()
        }
        #[cfg(not(feature = "parallel"))]
        {
            op()
        }
    }
}
