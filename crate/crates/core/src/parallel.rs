//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature (default) work is spread over rayon; without
//! it every policy degrades to a plain sequential loop. Results never depend
//! on the policy: maps preserve input order and reductions are chunked with a
//! fixed chunk size, then folded sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Auto,
    /// Dedicated pool with this many workers.
    Threads(usize),
}

/// Chunk length for deterministic partial sums.
pub const REDUCE_CHUNK: usize = 4096;

impl Parallelism {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            None => Parallelism::Auto,
            Some(0) | Some(1) => Parallelism::Sequential,
            Some(n) => Parallelism::Threads(n),
        }
    }

    pub fn is_sequential(self) -> bool {
        self == Parallelism::Sequential || !cfg!(feature = "parallel")
    }

    /// Runs `op` inside the pool this policy describes.
    pub fn install<R: Send>(self, op: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if let Parallelism::Threads(n) = self {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            return pool.install(op);
        }
        op()
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if !self.is_sequential() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps fixed-size chunks of `0..len` and returns per-chunk results in order.
    pub fn map_chunks<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
    {
        let chunks = len.div_ceil(REDUCE_CHUNK);
        let range = |c: usize| c * REDUCE_CHUNK..((c + 1) * REDUCE_CHUNK).min(len);
        #[cfg(feature = "parallel")]
        if !self.is_sequential() {
            use rayon::prelude::*;
            return (0..chunks).into_par_iter().map(|c| f(range(c))).collect();
        }
        (0..chunks).map(|c| f(range(c))).collect()
    }
}
