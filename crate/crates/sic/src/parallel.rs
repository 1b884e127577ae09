//! Thread-pool trial runner.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use sic_core::runner::TrialRunner;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SIC_THREADS";

/// Runs trials on a dedicated rayon pool. Output order follows trial index.
pub struct Rayon {
    pool: ThreadPool,
}

impl Rayon {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        Ok(Self { pool: ThreadPoolBuilder::new().num_threads(threads).build()? })
    }

    /// Honours `SIC_THREADS`; unset or unparsable means rayon's default.
    pub fn from_env() -> Result<Self, rayon::ThreadPoolBuildError> {
        let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0);
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl TrialRunner for Rayon {
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
