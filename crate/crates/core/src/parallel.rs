//! Order-preserving map over independent jobs.
//!
//! With the `parallel` feature the jobs run on a rayon pool; without it, or
//! when a single worker is requested, they run in index order on the calling
//! thread. Results are always returned by job index.

/// Worker count selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// The global rayon pool (all cores).
    #[default]
    All,
    /// A dedicated pool with exactly this many threads; `Fixed(1)` is sequential.
    Fixed(usize),
}

impl Workers {
    pub fn from_count(count: Option<usize>) -> Self {
        match count {
            None | Some(0) => Workers::All,
            Some(k) => Workers::Fixed(k),
        }
    }
}

pub fn map_indexed<T, F>(len: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if matches!(workers, Workers::Fixed(1)) || len <= 1 {
        return (0..len).map(f).collect();
    }
    map_pool(len, workers, f)
}

#[cfg(feature = "parallel")]
fn map_pool<T, F>(len: usize, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    match workers {
        Workers::All => (0..len).into_par_iter().map(f).collect(),
        Workers::Fixed(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..len).into_par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not build a {k}-thread pool ({e}); running sequentially");
                (0..len).map(f).collect()
            }
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn map_pool<T, F>(len: usize, _workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        for w in [Workers::All, Workers::Fixed(1), Workers::Fixed(3)] {
            let v = map_indexed(1000, w, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        }
    }
}
