//! Deterministic execution strategies.
//!
//! Parallel work always produces an index-ordered buffer of per-item results,
//! and floating-point reductions always use the same fixed fan-in-2 pairwise
//! tree over that buffer. Output bytes therefore depend only on inputs and
//! seeds, never on worker count. The `parallel` cargo feature gates the rayon
//! dependency; without it `Strategy::Parallel` silently degrades to the
//! sequential path, so downstream code never has to branch on the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Strategy {
    /// Map `f` over `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Strategy::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Strategy::Parallel => (0..n).into_par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Strategy::Parallel => (0..n).map(f).collect(),
        }
    }
}

/// Pairwise sum with a fixed tree shape (split at the midpoint, recurse).
///
/// The shape depends only on `xs.len()`, so the result is bit-reproducible
/// for a given input buffer, and more accurate than a running sum.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

/// Mean via [`tree_sum`]; 0 for an empty slice.
pub fn tree_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        tree_sum(xs) / xs.len() as f64
    }
}
