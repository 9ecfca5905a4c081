//! Execution strategy for the data-parallel loops (grid sampling, density
//! profiles, amplitude sweeps).
//!
//! With the `parallel` feature the work is spread over the rayon global
//! pool; without it `Exec::Parallel` quietly runs the sequential path, so
//! callers never need their own `cfg` gates.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// True when this strategy will actually fan out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Evaluates `f(0..n)` in order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps a slice element-wise, preserving order.
    pub fn map_slice<A, T, F>(self, items: &[A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&A) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Element-wise combination of two equally long slices.
    pub fn zip_map<A, B, T, F>(self, left: &[A], right: &[B], f: F) -> Vec<T>
    where
        A: Sync,
        B: Sync,
        T: Send,
        F: Fn(&A, &B) -> T + Sync + Send,
    {
        debug_assert_eq!(left.len(), right.len());
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => left
                .par_iter()
                .zip(right.par_iter())
                .map(|(a, b)| f(a, b))
                .collect(),
            _ => left.iter().zip(right).map(|(a, b)| f(a, b)).collect(),
        }
    }
}
