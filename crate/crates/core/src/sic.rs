//! Spectral dependency ratios and the SIC decision rule.
//!
//! For a candidate cause `X` and effect `Y` the forward ratio is
//!
//! ```text
//! rho_{X->Y} = <S_yy> / (<S_xx> <S_yy / S_xx>)
//! ```
//!
//! where `<.>` averages over frequency. It equals one when the input
//! spectrum is uncorrelated with `|h|^2 = S_yy / S_xx`. The backward ratio
//! swaps the roles of the two series, and the direction with the larger ratio
//! is inferred to be causal.

use crate::error::{invalid_input, Error, Result};
use crate::series::TimeSeries;
use crate::spectral::{freq_average, grid_average, ratio_average, welch_psd, PowerSpectrum, WelchConfig};

/// Absolute margin on `rho_forward - rho_backward` below which no direction
/// is reported.
pub const DEFAULT_TIE_EPS: f64 = 1e-3;

/// Relative floor applied to spectral denominators.
pub const DEFAULT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    XtoY,
    YtoX,
    Undecided,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::XtoY => Direction::YtoX,
            Direction::YtoX => Direction::XtoY,
            Direction::Undecided => Direction::Undecided,
        }
    }
}

/// How the two ratios were estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Estimator {
    /// From estimated power spectra of the observed series.
    #[default]
    SpectralRatio,
    /// From total powers and the energy of a known mechanism.
    PowerEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdrReport {
    pub rho_forward: f64,
    pub rho_backward: f64,
    pub delta: f64,
    pub decision: Direction,
    pub estimator: Estimator,
}

impl SdrReport {
    pub fn new(rho_forward: f64, rho_backward: f64, tie_eps: f64, estimator: Estimator) -> Self {
        let delta = rho_forward - rho_backward;
        Self { rho_forward, rho_backward, delta, decision: decide(delta, tie_eps), estimator }
    }
}

/// `XtoY` iff `delta > tie_eps`, `YtoX` iff `delta < -tie_eps`.
pub fn decide(delta: f64, tie_eps: f64) -> Direction {
    if delta > tie_eps {
        Direction::XtoY
    } else if delta < -tie_eps {
        Direction::YtoX
    } else {
        Direction::Undecided
    }
}

/// Forward spectral dependency ratio from the two spectra.
pub fn sdr_forward(sxx: &PowerSpectrum, syy: &PowerSpectrum, floor: f64) -> Result<f64> {
    let px = freq_average(sxx);
    let py = freq_average(syy);
    if !(px > 0.0) {
        return Err(Error::DegenerateSpectrum("input spectrum has zero average power".into()));
    }
    if !(py > 0.0) {
        return Err(Error::DegenerateSpectrum("output spectrum has zero average power".into()));
    }
    let gain = ratio_average(syy, sxx, floor)?;
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::DegenerateSpectrum(alloc::format!(
            "average spectral ratio is {gain} after flooring"
        )));
    }
    Ok(py / (px * gain))
}

/// `P(Y) / (P(X) ||h||^2)`: the forward ratio when the mechanism is known.
pub fn sdr_power_energy(px: f64, py: f64, h_energy: f64) -> Result<f64> {
    for (name, v) in [("input power", px), ("output power", py), ("filter energy", h_energy)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid_input!("{name} must be positive and finite, got {v}"));
        }
    }
    Ok(py / (px * h_energy))
}

/// Both ratios and the decision from already estimated spectra.
pub fn infer_spectra(sxx: &PowerSpectrum, syy: &PowerSpectrum, floor: f64, tie_eps: f64) -> Result<SdrReport> {
    let forward = sdr_forward(sxx, syy, floor)?;
    let backward = sdr_forward(syy, sxx, floor)?;
    Ok(SdrReport::new(forward, backward, tie_eps, Estimator::SpectralRatio))
}

/// Full inference settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InferConfig {
    pub welch: WelchConfig,
    pub tie_eps: f64,
    pub floor: f64,
}

impl InferConfig {
    pub fn for_length(len: usize) -> Self {
        Self { welch: WelchConfig::for_length(len), tie_eps: DEFAULT_TIE_EPS, floor: DEFAULT_FLOOR }
    }
}

/// Infers the causal direction between two equally long series using Welch
/// spectra and the default denominator floor.
pub fn infer(x: &TimeSeries, y: &TimeSeries, cfg: &WelchConfig, tie_eps: f64) -> Result<SdrReport> {
    infer_with(x, y, &InferConfig { welch: *cfg, tie_eps, floor: DEFAULT_FLOOR })
}

pub fn infer_with(x: &TimeSeries, y: &TimeSeries, cfg: &InferConfig) -> Result<SdrReport> {
    if x.len() != y.len() {
        return Err(invalid_input!("series lengths differ ({} vs {})", x.len(), y.len()));
    }
    if x.len() < 4 * cfg.welch.segment_length {
        log::warn!(
            "series of length {} is shorter than four segments of {}; spectra will be noisy",
            x.len(),
            cfg.welch.segment_length
        );
    }
    let sxx = welch_psd(x, &cfg.welch)?;
    let syy = welch_psd(y, &cfg.welch)?;
    ensure_nondegenerate(&sxx, x, "x")?;
    ensure_nondegenerate(&syy, y, "y")?;
    infer_spectra(&sxx, &syy, cfg.floor, cfg.tie_eps)
}

fn ensure_nondegenerate(s: &PowerSpectrum, series: &TimeSeries, name: &str) -> Result<()> {
    let raw_power = series.samples().iter().map(|v| v * v).sum::<f64>() / series.len() as f64;
    let power = freq_average(s);
    if !(power > 1e-20 * raw_power) || power == 0.0 {
        return Err(Error::DegenerateSpectrum(alloc::format!(
            "spectrum of {name} is numerically zero (series is constant after detrending)"
        )));
    }
    Ok(())
}

/// Result of the forward-backward inequality check for one transfer function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ViolationBound {
    /// `rho_f * rho_b = 1 / (<|h|^2> <1/|h|^2>)`, independent of the input.
    pub product: f64,
    /// Largest `alpha > 0` with `max |h|^2 <= (2 - alpha) <|h|^2>`, if any.
    pub alpha: Option<f64>,
    /// `1 / (1 + alpha <((|h|^2 - <|h|^2>) / <|h|^2>)^2>)` when `alpha` exists.
    pub bound: Option<f64>,
}

/// Product of the two ratios implied by a transfer function, and the upper
/// bound on it that holds when `|h|^2` never exceeds twice its mean.
///
/// Every average uses the same trapezoidal weights, so both inequalities
/// hold exactly on the grid, not only in the continuum limit.
pub fn violation_bound(h_mag_sq: &PowerSpectrum) -> Result<ViolationBound> {
    let values = h_mag_sq.values();
    let mean = grid_average(values);
    if !(mean > 0.0) {
        return Err(Error::DegenerateSpectrum("transfer function is zero everywhere".into()));
    }
    let inv: alloc::vec::Vec<f64> =
        values.iter().map(|v| if *v > 0.0 { 1.0 / v } else { f64::INFINITY }).collect();
    let inv_mean = grid_average(&inv);
    let product = 1.0 / (mean * inv_mean);

    let alpha = 2.0 - h_mag_sq.max() / mean;
    if alpha > 0.0 {
        let spread: alloc::vec::Vec<f64> = values.iter().map(|v| (v / mean - 1.0) * (v / mean - 1.0)).collect();
        let bound = 1.0 / (1.0 + alpha * grid_average(&spread));
        Ok(ViolationBound { product, alpha: Some(alpha), bound: Some(bound) })
    } else {
        Ok(ViolationBound { product, alpha: None, bound: None })
    }
}

/// Covariance of two grid functions, treating frequency as uniformly
/// distributed (trapezoidal weights).
pub fn spectral_covariance(a: &[f64], b: &[f64]) -> f64 {
    let prod: alloc::vec::Vec<f64> = a.iter().zip(b).map(|(u, v)| u * v).collect();
    grid_average(&prod) - grid_average(a) * grid_average(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    const K: usize = 4097;

    fn ma1() -> PowerSpectrum {
        PowerSpectrum::from_fn(K, |nu| 1.25 + libm::cos(2.0 * PI * nu)).unwrap()
    }

    fn flat(c: f64) -> PowerSpectrum {
        PowerSpectrum::new(vec![c; K]).unwrap()
    }

    #[test]
    fn flat_input_gives_unit_forward_ratio() {
        let sxx = flat(2.0);
        let syy = ma1().map(|v| 2.0 * v).unwrap();
        assert_abs_diff_eq!(sdr_forward(&sxx, &syy, DEFAULT_FLOOR).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_mechanism_gives_one() {
        let s = ma1();
        assert_abs_diff_eq!(sdr_forward(&s, &s, DEFAULT_FLOOR).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn backward_ratio_of_ma1_on_white_noise() {
        // 1 / (1.25 * 4/3)
        let r = sdr_forward(&ma1(), &flat(1.0), DEFAULT_FLOOR).unwrap();
        assert_abs_diff_eq!(r, 0.6, epsilon = 1e-9);
    }

    #[test]
    fn zero_input_spectrum_is_degenerate() {
        let zero = flat(0.0);
        assert!(matches!(sdr_forward(&zero, &flat(1.0), DEFAULT_FLOOR), Err(Error::DegenerateSpectrum(_))));
        assert!(matches!(sdr_forward(&flat(1.0), &zero, DEFAULT_FLOOR), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn power_energy_examples() {
        assert_abs_diff_eq!(sdr_power_energy(1.0, 1.25, 1.25).unwrap(), 1.0);
        assert_abs_diff_eq!(sdr_power_energy(3.0, 3.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(sdr_power_energy(2.0, 1.0, 1.0).unwrap(), 0.5);
        assert!(sdr_power_energy(0.0, 1.0, 1.0).is_err());
        assert!(sdr_power_energy(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn decision_thresholds() {
        assert_eq!(decide(0.01, 1e-3), Direction::XtoY);
        assert_eq!(decide(-0.01, 1e-3), Direction::YtoX);
        assert_eq!(decide(5e-4, 1e-3), Direction::Undecided);
        assert_eq!(decide(0.0, 0.0), Direction::Undecided);
    }

    #[test]
    fn violation_bound_constant_modulus() {
        let v = violation_bound(&flat(3.0)).unwrap();
        assert_abs_diff_eq!(v.product, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.alpha.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.bound.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn violation_bound_ma1() {
        let v = violation_bound(&ma1()).unwrap();
        assert_abs_diff_eq!(v.product, 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(v.alpha.unwrap(), 0.2, epsilon = 1e-12);
        // 1 / (1 + 0.2 * 0.5 / 1.25^2)
        assert_abs_diff_eq!(v.bound.unwrap(), 1.0 / 1.064, epsilon = 1e-9);
        assert!(v.product <= v.bound.unwrap());
    }

    #[test]
    fn violation_bound_without_alpha() {
        // AR(1) with a = 0.5: max 4 exceeds twice the mean 4/3
        let s = PowerSpectrum::from_fn(K, |nu| 1.0 / (1.25 - libm::cos(2.0 * PI * nu))).unwrap();
        let v = violation_bound(&s).unwrap();
        assert!(v.alpha.is_none() && v.bound.is_none());
        assert!(v.product < 1.0);
    }

    #[test]
    fn violation_bound_rejects_zero_transfer() {
        assert!(violation_bound(&flat(0.0)).is_err());
    }

    #[test]
    fn covariance_identity() {
        let sxx = PowerSpectrum::from_fn(K, |nu| 1.0 / (1.25 - libm::cos(2.0 * PI * nu))).unwrap();
        let h2 = ma1();
        let syy = sxx.product(&h2).unwrap();
        let lhs = freq_average(&syy) - freq_average(&sxx) * ratio_average(&syy, &sxx, 0.0).unwrap();
        let ratio: alloc::vec::Vec<f64> = syy.values().iter().zip(sxx.values()).map(|(y, x)| y / x).collect();
        assert_abs_diff_eq!(lhs, spectral_covariance(sxx.values(), &ratio), epsilon = 1e-9);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let x = TimeSeries::new(vec![0.0; 64]).unwrap();
        let y = TimeSeries::new(vec![0.0; 65]).unwrap();
        assert!(infer(&x, &y, &WelchConfig::for_length(64), DEFAULT_TIE_EPS).is_err());
    }

    #[test]
    fn constant_series_is_degenerate() {
        let x = TimeSeries::new(vec![1.0; 256]).unwrap();
        let y = TimeSeries::new((0..256).map(|t| libm::sin(t as f64)).collect()).unwrap();
        let err = infer(&x, &y, &WelchConfig::for_length(256), DEFAULT_TIE_EPS).unwrap_err();
        assert!(matches!(err, Error::DegenerateSpectrum(_)));
    }
}
