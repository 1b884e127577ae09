//! Cause-effect inference for pairs of stationary time series linked by a
//! linear time-invariant filter.
//!
//! The crate compares the spectral dependency ratio of the two candidate
//! directions: in the causal direction the input power spectrum and the
//! squared modulus of the filter's transfer function are uncorrelated over
//! frequency, so the ratio is close to one, while the anti-causal ratio
//! drops below one. Besides the decision rule itself the crate carries the
//! supporting apparatus: Welch spectra, ARMA filters, truncated Toeplitz
//! systems and their tracial ratio, a Granger baseline, synthetic
//! cause-effect generators and the benchmark drivers built on them.
//!
//! Everything here is `no_std` + `alloc`. File formats, the command line and
//! thread-pool parallelism live in the companion `sic` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod fft;

pub mod experiments;
pub mod filters;
pub mod granger;
pub mod rng;
pub mod runner;
pub mod series;
pub mod sic;
pub mod spectral;
pub mod special;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use filters::{ArmaFilter, ImpulseResponse};
pub use series::TimeSeries;
pub use sic::{Direction, Estimator, SdrReport};
pub use spectral::{PowerSpectrum, Window, WelchConfig, Detrend};
