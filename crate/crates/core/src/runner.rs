//! Trial scheduling abstraction.
//!
//! Experiments describe their work as `n` independent trials indexed
//! `0..n`; a [`TrialRunner`] decides how to execute them. Results are always
//! returned in index order so the outcome is independent of scheduling.

use alloc::vec::Vec;

pub trait TrialRunner: Sync {
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs trials one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialRunner for Sequential {
    fn run<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
