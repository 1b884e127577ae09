use alloc::string::String;

/// Errors raised by the inference and experiment routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("filter is not BIBO-stable (largest pole magnitude {max_pole:.6}, margin {margin})")]
    Unstable { max_pole: f64, margin: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("singular least-squares fit: {0}")]
    SingularFit(String),

    #[error("rejection sampling gave up after {attempts} draws (acceptance rate {acceptance_rate:.4})")]
    SamplingFailure { attempts: usize, acceptance_rate: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid_input {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(alloc::format!($($arg)*))
    };
}

macro_rules! invalid_config {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidConfig(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid_config;
pub(crate) use invalid_input;
