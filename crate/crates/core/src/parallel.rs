//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the items are spread over a rayon pool;
//! without it (or with `jobs == 1`) they run in order on the calling thread.
//! Results always come back in input order, so callers see identical output
//! regardless of worker count.

/// Map `f` over `items` using up to `jobs` workers (`0` means one per core).
pub fn map_ordered<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    map_pool(items, jobs, f)
}

#[cfg(feature = "parallel")]
fn map_pool<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    if jobs == 0 {
        return items.par_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_pool<T, R, F>(items: &[T], _jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Whether this build can run work concurrently.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
