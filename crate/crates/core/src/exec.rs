//! Data-parallel execution primitives.
//!
//! Everything in this crate that fans out over sample indices goes through
//! [`map_indexed`]. With the `parallel` feature (default) it runs on the
//! ambient rayon pool; without it the crate is fully sequential. Results are
//! always collected in index order, so the output is identical either way —
//! [`map_indexed_seq`] is the reference path the parallel one must match
//! element for element.

/// Chunk width used for deterministic reductions over sample batches.
/// Partial results are combined in chunk order, so totals do not depend on
/// how many workers ran the chunks.
pub(crate) const REDUCE_CHUNK: usize = 4096;

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    map_indexed_seq(n, f)
}

/// Single-threaded twin of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
