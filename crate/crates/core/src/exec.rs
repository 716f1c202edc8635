//! Execution policy for the data-parallel kernels.
//!
//! Every kernel that runs rows concurrently produces bitwise the same output
//! under [`Exec::Sequential`] and [`Exec::Parallel`]: each output element is
//! written by exactly one task and reduced in a fixed order. Reductions over
//! whole vectors (dot products, norms) are split into fixed-size chunks whose
//! partial sums are combined left to right, so the result does not depend on
//! the worker count either.
//!
//! Without the `parallel` feature, `Exec::Parallel` falls back to the
//! sequential loops.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per task below which a parallel loop is not worth splitting.
pub(crate) const MIN_PAR_LEN: usize = 256;

/// Chunk width of the deterministic reductions.
const REDUCE_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Sequential,
    /// Use the ambient rayon pool (see [`with_threads`]).
    Parallel,
}

impl Exec {
    #[inline]
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Runs `f` on a dedicated pool of `threads` workers.
///
/// One thread selects the sequential path; anything more installs a rayon pool
/// of that size and hands `Exec::Parallel` to the closure.
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Exec) -> R + Send,
{
    if threads <= 1 {
        return f(Exec::Sequential);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool");
    pool.install(|| f(Exec::Parallel))
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(_threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Exec) -> R + Send,
{
    f(Exec::Sequential)
}

/// `out[i] = row(i)` for every `i`.
pub(crate) fn fill<F>(exec: Exec, out: &mut [f64], row: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && out.len() >= MIN_PAR_LEN {
        out.par_iter_mut()
            .with_min_len(MIN_PAR_LEN)
            .enumerate()
            .for_each(|(i, o)| *o = row(i));
        return;
    }
    let _ = exec;
    for (i, o) in out.iter_mut().enumerate() {
        *o = row(i);
    }
}

/// Applies `block(i, chunk)` to consecutive `width`-sized chunks of `out`.
pub(crate) fn fill_chunks<F>(exec: Exec, out: &mut [f64], width: usize, block: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && out.len() >= MIN_PAR_LEN {
        let min_len = (MIN_PAR_LEN / width).max(1);
        out.par_chunks_mut(width)
            .with_min_len(min_len)
            .enumerate()
            .for_each(|(i, c)| block(i, c));
        return;
    }
    let _ = exec;
    for (i, c) in out.chunks_mut(width).enumerate() {
        block(i, c);
    }
}

fn chunk_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dot product with a reduction order fixed by the vector length alone.
pub fn dot(exec: Exec, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && a.len() >= 4 * REDUCE_CHUNK {
        let partial: Vec<f64> = a
            .par_chunks(REDUCE_CHUNK)
            .zip(b.par_chunks(REDUCE_CHUNK))
            .map(|(x, y)| chunk_dot(x, y))
            .collect();
        return partial.iter().sum();
    }
    let _ = exec;
    a.chunks(REDUCE_CHUNK)
        .zip(b.chunks(REDUCE_CHUNK))
        .map(|(x, y)| chunk_dot(x, y))
        .sum()
}

pub fn norm2(exec: Exec, a: &[f64]) -> f64 {
    dot(exec, a, a).sqrt()
}
