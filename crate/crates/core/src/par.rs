//! Thin dispatch layer over the data-parallel sweeps.
//!
//! Every hot loop in the crate goes through these helpers so that the
//! `parallel` feature swaps rayon in and out at one place. The sequential
//! bodies are always compiled and exported (`map_seq`, `for_each_seq`) so the
//! bench suite can compare both paths in a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map, always available.
pub fn map_seq<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Map over a slice, parallel when the `parallel` feature is enabled.
///
/// Output order matches input order in both modes, so downstream folds are
/// deterministic.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

/// Indexed map over `0..n`, parallel when enabled.
pub fn map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential indexed map, always available (bench baseline).
pub fn map_range_seq<R: Send>(n: usize, f: impl Fn(usize) -> R) -> Vec<R> {
    (0..n).map(f).collect()
}

/// Fill a mutable slice by index, parallel when enabled.
pub fn fill_indexed<T: Send>(out: &mut [T], f: impl Fn(usize) -> T + Sync + Send) {
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, slot)| *slot = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }
}
