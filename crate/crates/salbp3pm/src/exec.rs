//! Order-preserving batch execution. With the `parallel` feature (on by
//! default) work fans out over the rayon thread pool; without it the same
//! call runs a plain sequential loop. Callers express the data parallelism
//! once and stay agnostic to the build configuration, and results always
//! come back in input order, so batch output is identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when this build fans batch work out across threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Apply `f` to every item, returning results in input order.
#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Apply `f` to every item, returning results in input order.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    items.into_iter().map(f).collect()
}
