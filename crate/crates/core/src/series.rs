use alloc::vec::Vec;

use crate::error::{invalid_input, Result};

/// A finite, real-valued, uniformly sampled series.
///
/// Samples are always finite. The sample rate is carried along as metadata
/// only; every computation in the crate works in normalized frequency
/// (cycles per sample).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: Option<f64>,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid_input!("sample {pos} is not finite ({})", samples[pos]));
        }
        Ok(Self { samples, sample_rate: None })
    }

    pub fn with_sample_rate(mut self, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid_input!("sample rate must be positive and finite, got {rate}"));
        }
        self.sample_rate = Some(rate);
        Ok(self)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> Option<f64> {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population variance of the mean-removed samples, i.e. the average power
    /// of the detrended series.
    pub fn variance(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let mean = self.mean();
        self.samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.samples.len() as f64
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|v| v * factor).collect()).map(|mut s| {
            s.sample_rate = self.sample_rate;
            s
        })
    }

    /// Sub-range `[start, end)` of the series, keeping the sample rate.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self { samples: self.samples[start..end].to_vec(), sample_rate: self.sample_rate }
    }

    pub(crate) fn ensure_spectral_len(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(invalid_input!(
                "spectral operations need at least 2 samples, got {}",
                self.samples.len()
            ));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = crate::Error;

    fn try_from(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples)
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.samples
    }
}
