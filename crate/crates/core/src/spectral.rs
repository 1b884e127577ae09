//! Frequency-domain primitives: DFT on the one-sided grid, Welch power
//! spectral density estimates and frequency averages.
//!
//! All spectra are one-sided and live on a uniform grid of `K` points
//! `nu_k = k / (2 (K - 1))` covering `[0, 1/2]` inclusive. Because every
//! input is real, spectra are even in frequency and an average over the
//! one-sided grid equals the average over the full interval `[-1/2, 1/2]`.
//! Values are densities over that full interval, so the average of a PSD is
//! the power (variance) of the series.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use num_complex::Complex64;

use crate::error::{invalid_config, invalid_input, Result};
use crate::fft::Fft;
use crate::series::TimeSeries;

/// Nonnegative spectral density sampled on the one-sided uniform grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerSpectrum {
    values: Vec<f64>,
}

impl PowerSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid_input!("a spectrum needs at least 2 grid points, got {}", values.len()));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(invalid_input!("spectral value at grid point {k} is {v}; expected finite and nonnegative"));
        }
        Ok(Self { values })
    }

    /// Samples `f(nu)` on a `k`-point grid.
    pub fn from_fn(k: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if k < 2 {
            return Err(invalid_input!("a spectrum needs at least 2 grid points, got {k}"));
        }
        Self::new(grid(k).map(f).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> {
        grid(self.values.len())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise map, re-validated.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| f(*v)).collect())
    }

    /// Pointwise product with another spectrum on the same grid.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_same_grid(self, other)?;
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }
}

/// Uniform one-sided grid of `k` frequencies over `[0, 1/2]`.
pub fn grid(k: usize) -> impl Iterator<Item = f64> {
    let step = if k > 1 { 0.5 / (k - 1) as f64 } else { 0.0 };
    (0..k).map(move |i| i as f64 * step)
}

/// Trapezoidal quadrature weights of the one-sided grid, normalized to sum to
/// one so that a weighted sum is an average over frequency.
pub fn trapezoid_weights(k: usize) -> impl Iterator<Item = f64> {
    let inner = 1.0 / (k - 1) as f64;
    (0..k).map(move |i| if i == 0 || i == k - 1 { 0.5 * inner } else { inner })
}

/// Frequency average of arbitrary grid values (trapezoidal rule).
pub fn grid_average(values: &[f64]) -> f64 {
    trapezoid_weights(values.len()).zip(values).map(|(w, v)| w * v).sum()
}

fn check_same_grid(a: &PowerSpectrum, b: &PowerSpectrum) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid_input!("spectra live on different grids ({} vs {} points)", a.len(), b.len()));
    }
    Ok(())
}

/// DFT `sum_t x_t exp(-i 2 pi nu t)` evaluated on the one-sided grid.
///
/// Odd-length input is zero-padded by one sample so the grid always reaches
/// `nu = 1/2`; the grid then has `K = n_fft / 2 + 1` points.
pub fn dft(x: &TimeSeries) -> Result<Vec<Complex64>> {
    x.ensure_spectral_len()?;
    let n_fft = even_fft_len(x.len());
    let mut buf: Vec<Complex64> = x.samples().iter().map(|v| Complex64::new(*v, 0.0)).collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    Fft::new(n_fft).forward(&mut buf);
    buf.truncate(n_fft / 2 + 1);
    Ok(buf)
}

fn even_fft_len(n: usize) -> usize {
    n + (n & 1)
}

/// Taper applied to each Welch segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Window {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

impl Window {
    /// Periodic (DFT-even) coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let phase = |i: usize| 2.0 * PI * i as f64 / n as f64;
        match self {
            Window::Hann => (0..n).map(|i| 0.5 - 0.5 * libm::cos(phase(i))).collect(),
            Window::Hamming => (0..n).map(|i| 0.54 - 0.46 * libm::cos(phase(i))).collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Detrend {
    /// Subtract each segment's mean.
    #[default]
    Mean,
    None,
}

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WelchConfig {
    pub segment_length: usize,
    pub overlap_fraction: f64,
    pub window: Window,
    pub detrend: Detrend,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self { segment_length: 256, overlap_fraction: 0.5, window: Window::Hann, detrend: Detrend::Mean }
    }
}

impl WelchConfig {
    /// Default settings with the segment length capped at a quarter of the
    /// series, `min(256, len / 4)`, and never below 2.
    pub fn for_length(len: usize) -> Self {
        Self { segment_length: (len / 4).clamp(2, 256), ..Self::default() }
    }

    pub fn with_segment_length(mut self, segment_length: usize) -> Self {
        self.segment_length = segment_length;
        self
    }

    /// Hop between consecutive segment starts.
    pub fn hop(&self) -> usize {
        let overlap = libm::floor(self.overlap_fraction * self.segment_length as f64) as usize;
        self.segment_length.saturating_sub(overlap).max(1)
    }

    /// Number of frequency grid points produced.
    pub fn grid_len(&self) -> usize {
        even_fft_len(self.segment_length) / 2 + 1
    }

    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.segment_length < 2 {
            return Err(invalid_config!("segment length must be at least 2, got {}", self.segment_length));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(invalid_config!("overlap fraction must lie in [0, 1), got {}", self.overlap_fraction));
        }
        if self.segment_length > series_len {
            return Err(invalid_config!(
                "segment length {} exceeds series length {series_len}",
                self.segment_length
            ));
        }
        Ok(())
    }

    /// Number of segments averaged for a series of `len` samples.
    pub fn segment_count(&self, len: usize) -> usize {
        if len < self.segment_length {
            0
        } else {
            (len - self.segment_length) / self.hop() + 1
        }
    }
}

/// Welch power spectral density estimate.
///
/// Averages modified periodograms `|DFT(w * segment)|^2 / sum(w^2)` over
/// overlapping segments. With this scaling the trapezoidal average of the
/// result equals the mean windowed segment power, which for stationary input
/// is the variance of the detrended series.
pub fn welch_psd(x: &TimeSeries, cfg: &WelchConfig) -> Result<PowerSpectrum> {
    x.ensure_spectral_len()?;
    cfg.validate(x.len())?;
    let seg = cfg.segment_length;
    let n_fft = even_fft_len(seg);
    let bins = n_fft / 2 + 1;
    let window = cfg.window.coefficients(seg);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let plan = Fft::new(n_fft);

    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let hop = cfg.hop();
    let count = cfg.segment_count(x.len());
    for s in 0..count {
        let segment = &x.samples()[s * hop..s * hop + seg];
        let offset = match cfg.detrend {
            Detrend::Mean => segment.iter().sum::<f64>() / seg as f64,
            Detrend::None => 0.0,
        };
        for (b, (v, w)) in buf.iter_mut().zip(segment.iter().zip(&window)) {
            *b = Complex64::new((v - offset) * w, 0.0);
        }
        for b in &mut buf[seg..] {
            *b = Complex64::new(0.0, 0.0);
        }
        plan.forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (count as f64 * window_power);
    PowerSpectrum::new(acc.into_iter().map(|a| a * scale).collect())
}

/// Average over frequency `<s>`.
pub fn freq_average(s: &PowerSpectrum) -> f64 {
    grid_average(s.values())
}

/// `<num / den>` with the denominator floored at `floor * <den>`.
pub fn ratio_average(num: &PowerSpectrum, den: &PowerSpectrum, floor: f64) -> Result<f64> {
    check_same_grid(num, den)?;
    if !(floor >= 0.0 && floor.is_finite()) {
        return Err(invalid_config!("denominator floor must be finite and nonnegative, got {floor}"));
    }
    let guard = floor * freq_average(den);
    let ratios: Vec<f64> = num
        .values()
        .iter()
        .zip(den.values())
        .map(|(n, d)| {
            let d = d.max(guard);
            if d > 0.0 {
                n / d
            } else if *n == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(grid_average(&ratios))
}
