//! File formats, thread-pool execution and the `sic` command line on top of
//! `sic-core`.

pub mod cli;
pub mod io;
pub mod parallel;
pub mod report;
