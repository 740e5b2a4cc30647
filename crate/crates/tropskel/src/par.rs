//! Execution-mode switch for the data-parallel sweeps. With the `parallel`
//! feature enabled (the default) `Parallel` fans work out over rayon;
//! without it both modes run sequentially, so code written against this
//! module never changes behaviour, only speed.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::Parallel
    }
}

/// Maps `f` over `items`, parallel when the mode and feature allow it.
/// Output order matches input order in both modes.
pub fn map_items<T, U, F>(mode: ExecMode, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}

/// Fold over indices 0..n with an associative reducer.
pub fn reduce_indexed<U, F, R>(mode: ExecMode, n: usize, f: F, identity: U, reduce: R) -> U
where
    U: Send + Sync + Clone,
    F: Fn(usize) -> U + Sync + Send,
    R: Fn(U, U) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .map(&f)
                .reduce(|| identity.clone(), &reduce);
        }
    }
    let _ = mode;
    (0..n).map(f).fold(identity, reduce)
}

/// Thread count requested through the environment, used by the CLI to size
/// the rayon pool. Zero or unset means "let the library decide".
pub fn env_thread_count() -> Option<usize> {
    std::env::var("TROPSKEL_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
}
