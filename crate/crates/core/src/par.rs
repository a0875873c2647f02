//! Execution policy for the data-parallel local kernels.
//!
//! With the `parallel` feature (default) kernels fan out over rayon's global
//! pool; without it every kernel runs the sequential path. Both paths are
//! available at runtime when the feature is on so they can be benchmarked
//! against each other.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `(0..n).map(f).collect()`
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// `items.iter().map(f).collect()`
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// In-place update of every element.
    pub fn for_each_mut<S, F>(self, items: &mut [S], f: F)
    where
        S: Send,
        F: Fn(&mut S) + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter_mut().for_each(f),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter_mut().for_each(f),
        }
    }
}
