//! Execution-mode helpers.
//!
//! Every parallel reduction here splits its input into fixed-size chunks and
//! folds chunk results in index order, so the arithmetic is identical in
//! both modes and with or without the `parallel` feature.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs sequentially.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) const SUM_CHUNK: usize = 512;

/// Maps `f` over `0..len`, preserving order.
pub(crate) fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && len > 1 {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Chunked reduction of `f` over `items`; `f` returns an accumulator that is
/// combined with `add` in chunk order.
pub(crate) fn chunked_fold<I, A, F, G>(exec: Execution, items: &[I], zero: A, f: F, add: G) -> A
where
    I: Sync,
    A: Send + Clone + Sync,
    F: Fn(&I) -> A + Sync + Send,
    G: Fn(A, A) -> A + Sync + Send,
{
    let chunk_sum = |chunk: &[I]| chunk.iter().fold(zero.clone(), |acc, x| add(acc, f(x)));
    let partials: Vec<A> = {
        #[cfg(feature = "parallel")]
        {
            if exec.is_parallel() && items.len() > SUM_CHUNK {
                use rayon::prelude::*;
                items.par_chunks(SUM_CHUNK).map(chunk_sum).collect()
            } else {
                items.chunks(SUM_CHUNK).map(chunk_sum).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = exec;
            items.chunks(SUM_CHUNK).map(chunk_sum).collect()
        }
    };
    partials.into_iter().fold(zero.clone(), &add)
}
