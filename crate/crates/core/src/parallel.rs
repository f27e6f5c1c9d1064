//! Batch evaluation over a fixed number of workers.
//!
//! With the `parallel` feature a batch fans out over a rayon pool; every
//! worker gets its own state from `init` (typically a solver context).
//! Without it, or with one worker, items run in order on the caller's
//! thread. Results are returned in item order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub struct Workers {
    count: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers")
            .field("count", &self.count)
            .finish()
    }
}

impl Workers {
    /// `count` workers; 0 means one per available core. Without the
    /// `parallel` feature the count is always 1.
    pub fn new(count: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let count = if count == 0 {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            } else {
                count
            };
            let pool = (count > 1)
                .then(|| {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(count)
                        .build()
                        .ok()
                })
                .flatten();
            let count = if pool.is_some() { count } else { 1 };
            Self { count, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = count;
            Self { count: 1 }
        }
    }

    pub fn sequential() -> Self {
        Self::new(1)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn map_init<T, S, R, I, F>(&self, items: &[T], init: I, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().map_init(&init, |s, t| f(s, t)).collect());
        }
        map_init_seq(items, init, f)
    }
}

/// The sequential path of [`Workers::map_init`].
pub fn map_init_seq<T, S, R>(
    items: &[T],
    init: impl Fn() -> S,
    f: impl Fn(&mut S, &T) -> R,
) -> Vec<R> {
    let mut state = init();
    items.iter().map(|t| f(&mut state, t)).collect()
}
