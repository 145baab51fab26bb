//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon unless
//! [`set_sequential`] forced sequential execution at runtime. Without the
//! feature everything runs on the calling thread. Results never depend on the
//! execution mode: maps preserve input order and no floating-point reduction
//! is performed in parallel.

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force (or release) sequential execution of every helper in this module.
pub fn set_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

/// Order-preserving map over a slice.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if is_parallel() {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if is_parallel() {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}

/// Maximum of `f(i)` over `0..n` (`f64::NEG_INFINITY` when `n == 0`).
/// Max is exact and order independent, so the parallel path is safe.
#[cfg(feature = "parallel")]
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if is_parallel() {
        (0..n)
            .into_par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max)
    } else {
        (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(not(feature = "parallel"))]
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Minimum of `f(i)` over `0..n` (`f64::INFINITY` when `n == 0`).
pub fn min_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    -max_range(n, |i| -f(i))
}

/// `true` iff `pred(i)` holds for every `i` in `0..n`.
#[cfg(feature = "parallel")]
pub fn all_range<F>(n: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    if is_parallel() {
        (0..n).into_par_iter().all(pred)
    } else {
        (0..n).all(pred)
    }
}

#[cfg(not(feature = "parallel"))]
pub fn all_range<F>(n: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool,
{
    (0..n).all(pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(&xs, |x| x * x);
        set_sequential(true);
        let b = map(&xs, |x| x * x);
        let m = max_range(1000, |i| (i as f64).sin());
        set_sequential(false);
        assert_eq!(a, b);
        assert_eq!(m, max_range(1000, |i| (i as f64).sin()));
        assert_eq!(min_range(0, |_| 0.0), f64::INFINITY);
        assert!(all_range(10, |i| i < 10));
    }
}
