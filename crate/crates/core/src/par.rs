//! Deterministic data-parallel reductions over index ranges.
//!
//! Every enumeration in this crate (cube averages, moment scans, the U^3
//! sum) reduces through a fixed tree: the index range is split into blocks
//! of [`BLOCK`] consecutive indices, each block is accumulated sequentially
//! in index order, and the per-block partials are folded left to right.
//! Only the *computation* of blocks is handed to rayon, never the shape of
//! the tree, so results are bit-identical whether the `parallel` feature is
//! enabled or not and regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of consecutive indices per reduction-tree leaf.
pub const BLOCK: u64 = 1 << 14;

fn block_partials<T, F, G>(len: u64, eval: &F, accumulate: &G) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
    G: Fn(T, T) -> T + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let run_block = |b: u64| {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(len);
        let mut acc = eval(lo);
        for i in lo + 1..hi {
            acc = accumulate(acc, eval(i));
        }
        acc
    };

    #[cfg(feature = "parallel")]
    {
        if blocks > 1 {
            return (0..blocks).into_par_iter().map(run_block).collect();
        }
    }
    (0..blocks).map(run_block).collect()
}

/// Sum `f(i)` over `0..len` through the fixed block tree.
pub fn block_sum<F>(len: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    if len == 0 {
        return 0.0;
    }
    block_partials(len, &f, &|a, b| a + b).into_iter().fold(0.0, |a, b| a + b)
}

/// Sequential twin of [`block_sum`]: same tree, no thread pool.
pub fn block_sum_seq<F>(len: u64, f: F) -> f64
where
    F: Fn(u64) -> f64,
{
    if len == 0 {
        return 0.0;
    }
    let blocks = len.div_ceil(BLOCK);
    let mut total = 0.0;
    for b in 0..blocks {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(len);
        let mut acc = f(lo);
        for i in lo + 1..hi {
            acc += f(i);
        }
        total += acc;
    }
    total
}

/// Maximum of `f(i)` over `0..len` through the fixed block tree.
pub fn block_max<F>(len: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    if len == 0 {
        return f64::NEG_INFINITY;
    }
    block_partials(len, &f, &f64::max).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Sequential twin of [`block_max`].
pub fn block_max_seq<F>(len: u64, f: F) -> f64
where
    F: Fn(u64) -> f64,
{
    if len == 0 {
        return f64::NEG_INFINITY;
    }
    let blocks = len.div_ceil(BLOCK);
    let mut total = f64::NEG_INFINITY;
    for b in 0..blocks {
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(len);
        let mut acc = f(lo);
        for i in lo + 1..hi {
            acc = acc.max(f(i));
        }
        total = total.max(acc);
    }
    total
}

/// Map every index of `0..len` and collect results in index order.
///
/// Used where each index produces an independent record (per-slice norms,
/// per-derivative partials of the U^3 sum).
pub fn ordered_map<T, F>(len: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if len > 1 {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}
