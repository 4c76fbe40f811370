//! Deterministic data-parallel helpers.
//!
//! Every reduction is split into fixed-size blocks whose boundaries depend only
//! on the problem size. Blocks are reduced sequentially inside and combined in
//! index order, so [`Execution::Parallel`] and [`Execution::Sequential`] return
//! bit-identical results for any thread count.
//!
//! Without the `parallel` feature, `Parallel` silently runs sequentially.

/// Block length used by all chunked reductions.
pub const BLOCK: usize = 256;

/// How a data-parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work on several threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps `f` over the items of a slice, preserving order.
pub fn map_slice<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}

/// Computes one accumulator per block of [`BLOCK`] indices, in block order.
///
/// `fold(acc, i)` is applied sequentially within each block starting from
/// `init()`; the caller combines the returned block partials in order.
pub fn block_partials<A, I, F>(exec: Execution, n: usize, init: I, fold: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    map_indexed(exec, blocks, |b| {
        let mut acc = init();
        let end = ((b + 1) * BLOCK).min(n);
        for i in b * BLOCK..end {
            fold(&mut acc, i);
        }
        acc
    })
}

/// Deterministic sum of `f(i)` over `0..n`.
pub fn sum_indexed<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    block_partials(exec, n, || 0.0, |acc, i| *acc += f(i))
        .into_iter()
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_sums_are_bit_identical() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = sum_indexed(Execution::Sequential, 100_003, f);
        let b = sum_indexed(Execution::Parallel, 100_003, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(Execution::Parallel, 1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn empty_reduction_is_zero() {
        assert_eq!(sum_indexed(Execution::Parallel, 0, |_| 1.0), 0.0);
    }
}
