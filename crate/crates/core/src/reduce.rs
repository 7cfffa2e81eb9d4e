//! Deterministic parallel reductions.
//!
//! Work is split into fixed blocks of consecutive indices. Each block is
//! reduced sequentially in index order, and block results are combined by a
//! fixed binary tree. The reduction tree depends only on the problem size, so
//! results are bit-identical for any number of worker threads.

use rayon::prelude::*;

/// Rows per block for the pairwise kernels.
pub const ROW_BLOCK: usize = 32;

/// Sums `xs` along a balanced binary tree with a fixed shape.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Combines `items` along the same fixed tree shape as [`pairwise_sum`].
pub fn tree_reduce<T: Clone>(items: &[T], identity: &T, combine: &impl Fn(&T, &T) -> T) -> T {
    match items.len() {
        0 => identity.clone(),
        1 => items[0].clone(),
        n => {
            let mid = n / 2;
            combine(
                &tree_reduce(&items[..mid], identity, combine),
                &tree_reduce(&items[mid..], identity, combine),
            )
        }
    }
}

/// Evaluates `block_fn(range)` for consecutive blocks of `0..n` of length
/// `block` and returns the results in block order.
pub fn par_blocks<T, F>(n: usize, block: usize, block_fn: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let block = block.max(1);
    let n_blocks = n.div_ceil(block);
    (0..n_blocks)
        .into_par_iter()
        .map(|b| block_fn(b * block..((b + 1) * block).min(n)))
        .collect()
}
