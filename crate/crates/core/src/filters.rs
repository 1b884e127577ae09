//! ARMA (IIR/FIR) filters in direct form.
//!
//! The difference equation is
//!
//! ```text
//! y[n] = sum_{i=0..=FO} b[i] x[n-i] + sum_{j=1..=BO} a[j] y[n-j]
//! ```
//!
//! i.e. feedback coefficients enter with a **plus** sign, and the transfer
//! function is `B(z) / (1 - sum_j a[j] z^-j)`. This is the opposite of the
//! `scipy.signal.lfilter` convention; negate the feedback vector when
//! importing coefficients from there.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_input, Error, Result};
use crate::series::TimeSeries;
use crate::spectral::{grid, PowerSpectrum};

/// Poles must satisfy `|z| < 1 - margin`.
pub const DEFAULT_STABILITY_MARGIN: f64 = 1e-3;

/// Hard cap on impulse-response truncation length.
const MAX_IMPULSE_LEN: usize = 1 << 26;

/// Stable ARMA filter with `a[0] = 1` implied.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ArmaFilter {
    feedforward: Vec<f64>,
    feedback: Vec<f64>,
}

impl ArmaFilter {
    /// Builds a filter from feedforward `b[0..=FO]` and feedback `a[1..=BO]`,
    /// requiring stability with the default margin.
    pub fn new(feedforward: Vec<f64>, feedback: Vec<f64>) -> Result<Self> {
        Self::with_margin(feedforward, feedback, DEFAULT_STABILITY_MARGIN)
    }

    pub fn with_margin(feedforward: Vec<f64>, feedback: Vec<f64>, margin: f64) -> Result<Self> {
        if feedforward.is_empty() || feedforward.iter().all(|b| *b == 0.0) {
            return Err(invalid_input!("feedforward coefficients must not be all zero"));
        }
        if feedforward.iter().chain(&feedback).any(|c| !c.is_finite()) {
            return Err(invalid_input!("filter coefficients must be finite"));
        }
        let max_pole = max_pole_magnitude(&feedback).unwrap_or(f64::INFINITY);
        if max_pole >= 1.0 - margin {
            return Err(Error::Unstable { max_pole, margin });
        }
        Ok(Self { feedforward, feedback })
    }

    pub fn identity() -> Self {
        Self { feedforward: vec![1.0], feedback: Vec::new() }
    }

    /// Finite impulse response filter with the given taps.
    pub fn fir(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps, Vec::new())
    }

    pub fn feedforward(&self) -> &[f64] {
        &self.feedforward
    }

    pub fn feedback(&self) -> &[f64] {
        &self.feedback
    }

    pub fn feedforward_order(&self) -> usize {
        self.feedforward.len() - 1
    }

    pub fn feedback_order(&self) -> usize {
        self.feedback.len()
    }

    pub fn is_fir(&self) -> bool {
        self.feedback.iter().all(|a| *a == 0.0)
    }

    /// Runs the difference equation over `x` with zero initial conditions.
    pub fn apply(&self, x: &TimeSeries) -> TimeSeries {
        let y = self.apply_slice(x.samples());
        let out = TimeSeries::new(y).expect("stable filter on finite input yields finite output");
        match x.sample_rate() {
            Some(rate) => out.with_sample_rate(rate).expect("rate already validated"),
            None => out,
        }
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for n in 0..x.len() {
            let mut acc = 0.0;
            for (i, b) in self.feedforward.iter().enumerate().take(n + 1) {
                acc += b * x[n - i];
            }
            for (j, a) in self.feedback.iter().enumerate().take(n) {
                acc += a * y[n - 1 - j];
            }
            y[n] = acc;
        }
        y
    }

    /// Poles of the transfer function (roots of `z^BO - a1 z^(BO-1) - ... - a_BO`).
    pub fn poles(&self) -> Vec<Complex64> {
        poles(&self.feedback).unwrap_or_default()
    }

    pub fn max_pole_magnitude(&self) -> f64 {
        max_pole_magnitude(&self.feedback).unwrap_or(f64::INFINITY)
    }

    /// Frequency response `B(e^{-i 2 pi nu}) / A(e^{-i 2 pi nu})`.
    pub fn frequency_response(&self, nu: f64) -> Complex64 {
        let theta = -2.0 * PI * nu;
        let eval = |coeffs: &[f64], first_power: usize| -> Complex64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let angle = theta * (k + first_power) as f64;
                    Complex64::new(c * libm::cos(angle), c * libm::sin(angle))
                })
                .sum()
        };
        let num = eval(&self.feedforward, 0);
        let den = Complex64::new(1.0, 0.0) - eval(&self.feedback, 1);
        num / den
    }

    /// `|h(nu)|^2` sampled on a `k`-point one-sided grid.
    pub fn transfer_mag_sq(&self, k: usize) -> Result<PowerSpectrum> {
        if k < 2 {
            return Err(invalid_input!("a spectrum needs at least 2 grid points, got {k}"));
        }
        PowerSpectrum::new(grid(k).map(|nu| self.frequency_response(nu).norm_sqr()).collect())
    }

    /// Causal impulse response, truncated once the remaining l1 mass is
    /// bounded by `tail_tol` times the l1 mass kept.
    ///
    /// The tail bound assumes `|h_n| <= C r^n` with `r` slightly above the
    /// largest pole magnitude and `C` the largest ratio `|h_j| / r^j` seen so
    /// far. It overestimates the true tail.
    pub fn impulse_response(&self, tail_tol: f64) -> Result<ImpulseResponse> {
        if !(tail_tol > 0.0 && tail_tol.is_finite()) {
            return Err(invalid_input!("tail tolerance must be positive, got {tail_tol}"));
        }
        if self.is_fir() {
            return Ok(ImpulseResponse { taps: self.feedforward.clone(), truncation_tail: 0.0 });
        }
        let pole = self.max_pole_magnitude();
        let rate = pole + 0.05 * (1.0 - pole);
        let log_rate = libm::log(rate);
        let min_len = self.feedforward.len().max(self.feedback.len() + 1);

        let mut taps: Vec<f64> = Vec::new();
        let mut l1 = 0.0;
        // log of the running max of |h_j| / rate^j
        let mut log_c = f64::NEG_INFINITY;
        loop {
            let n = taps.len();
            let mut h = self.feedforward.get(n).copied().unwrap_or(0.0);
            for (j, a) in self.feedback.iter().enumerate().take(n) {
                h += a * taps[n - 1 - j];
            }
            taps.push(h);
            l1 += h.abs();
            if h != 0.0 {
                log_c = log_c.max(libm::log(h.abs()) - n as f64 * log_rate);
            }
            let len = taps.len();
            if len >= min_len {
                let tail = libm::exp(log_c + len as f64 * log_rate) / (1.0 - rate);
                if tail <= tail_tol * l1 {
                    return Ok(ImpulseResponse { taps, truncation_tail: tail });
                }
            }
            if len >= MAX_IMPULSE_LEN {
                return Err(invalid_input!(
                    "impulse response did not reach tolerance {tail_tol} within {MAX_IMPULSE_LEN} taps"
                ));
            }
        }
    }
}

/// Causal impulse response `h_0 .. h_{L-1}` with an upper bound on the l1
/// mass dropped beyond `L`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ImpulseResponse {
    pub taps: Vec<f64>,
    pub truncation_tail: f64,
}

impl ImpulseResponse {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(invalid_input!("impulse response taps must be finite"));
        }
        Ok(Self { taps, truncation_tail: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Squared l2 norm of the kept taps; the truncated tail is not added.
    pub fn energy(&self) -> f64 {
        energy(&self.taps)
    }

    /// Full linear convolution of `x` with the taps, truncated to `x.len()`.
    pub fn convolve(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|n| self.taps.iter().take(n + 1).enumerate().map(|(k, h)| h * x[n - k]).sum())
            .collect()
    }
}

/// `sum h_k^2`.
pub fn energy(taps: &[f64]) -> f64 {
    taps.iter().map(|h| h * h).sum()
}

/// Roots of the feedback polynomial via companion-matrix eigenvalues.
/// `None` when the eigenvalue iteration fails to converge.
pub fn poles(feedback: &[f64]) -> Option<Vec<Complex64>> {
    // trailing zero coefficients only add poles at the origin
    let order = feedback.iter().rposition(|a| *a != 0.0).map_or(0, |p| p + 1);
    match order {
        0 => Some(Vec::new()),
        1 => Some(vec![Complex64::new(feedback[0], 0.0)]),
        _ => {
            let companion = DMatrix::from_fn(order, order, |i, j| {
                if i == 0 {
                    feedback[j]
                } else if i == j + 1 {
                    1.0
                } else {
                    0.0
                }
            });
            let schur = nalgebra::Schur::try_new(companion, f64::EPSILON, 10_000)?;
            Some(schur.complex_eigenvalues().iter().copied().collect())
        }
    }
}

fn max_pole_magnitude(feedback: &[f64]) -> Option<f64> {
    poles(feedback).map(|p| p.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// True iff every pole of the feedback polynomial lies strictly inside the
/// circle of radius `1 - margin`. Empty feedback is always stable.
pub fn is_bibo_stable(feedback: &[f64], margin: f64) -> bool {
    if feedback.iter().any(|a| !a.is_finite()) {
        return false;
    }
    match max_pole_magnitude(feedback) {
        Some(r) => r < 1.0 - margin,
        None => false,
    }
}

/// Draws an `m x m` orthogonal matrix from the Haar measure on `O(m)`:
/// QR of a Gaussian matrix with the columns of `Q` re-signed so that `R`
/// has a positive diagonal.
pub fn haar_orthogonal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let gaussian = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `U taps` for a Haar-random orthogonal `U`; preserves the Euclidean norm.
pub fn haar_rotate<R: Rng + ?Sized>(taps: &[f64], rng: &mut R) -> Vec<f64> {
    let u = haar_orthogonal(taps.len(), rng);
    let rotated = u * DVector::from_column_slice(taps);
    rotated.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_filter_passes_through() {
        let x = series(&[0.3, -1.0, 2.5, 7.0]);
        assert_eq!(ArmaFilter::identity().apply(&x), x);
    }

    #[test]
    fn pure_delay() {
        let f = ArmaFilter::fir(vec![0.0, 1.0]).unwrap();
        let y = f.apply(&series(&[1.0, 2.0, 3.0]));
        assert_eq!(y.samples(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn geometric_recursion_from_positive_feedback() {
        let f = ArmaFilter::new(vec![1.0], vec![0.5]).unwrap();
        let y = f.apply(&series(&[1.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(y.samples(), &[1.0, 0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn rejects_all_zero_feedforward_and_unstable_feedback() {
        assert!(ArmaFilter::new(vec![0.0, 0.0], vec![]).is_err());
        assert!(matches!(ArmaFilter::new(vec![1.0], vec![1.0]), Err(Error::Unstable { .. })));
        assert!(matches!(ArmaFilter::new(vec![1.0], vec![0.9995]), Err(Error::Unstable { .. })));
        assert!(ArmaFilter::with_margin(vec![1.0], vec![0.9995], 1e-4).is_ok());
    }

    #[test]
    fn fir_impulse_response_is_exact() {
        let h = ArmaFilter::fir(vec![1.0, 0.5]).unwrap().impulse_response(1e-9).unwrap();
        assert_eq!(h.taps, vec![1.0, 0.5]);
        assert_eq!(h.truncation_tail, 0.0);
        assert_abs_diff_eq!(h.energy(), 1.25);
    }

    #[test]
    fn ar1_impulse_response_truncation() {
        let h = ArmaFilter::new(vec![1.0], vec![0.5]).unwrap().impulse_response(1e-6).unwrap();
        assert!((20..=24).contains(&h.len()), "len {}", h.len());
        for (n, t) in h.taps.iter().enumerate() {
            assert_abs_diff_eq!(*t, libm::pow(0.5, n as f64), epsilon = 1e-15);
        }
        let true_tail = 2.0 * libm::pow(0.5, h.len() as f64);
        let l1: f64 = h.taps.iter().map(|t| t.abs()).sum();
        assert!(true_tail <= h.truncation_tail);
        assert!(h.truncation_tail <= 1e-6 * l1);
        // sum 4^-n = 4/3
        assert_abs_diff_eq!(h.energy(), 4.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn slow_pole_impulse_response_is_long_but_finite() {
        let f = ArmaFilter::with_margin(vec![1.0], vec![0.999], 1e-4).unwrap();
        let h = f.impulse_response(1e-6).unwrap();
        let true_tail = libm::pow(0.999, h.len() as f64) / 0.001;
        let l1: f64 = h.taps.iter().map(|t| t.abs()).sum();
        assert!(h.len() > 10_000);
        assert!(true_tail <= h.truncation_tail);
        assert!(h.truncation_tail <= 1e-6 * l1);
    }

    #[test]
    fn transfer_examples() {
        let ma = ArmaFilter::fir(vec![1.0, 0.5]).unwrap().transfer_mag_sq(129).unwrap();
        assert_abs_diff_eq!(ma.values()[0], 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(ma.values()[128], 0.25, epsilon = 1e-14);
        for (nu, v) in ma.frequencies().zip(ma.values()) {
            assert_abs_diff_eq!(*v, 1.25 + libm::cos(2.0 * PI * nu), epsilon = 1e-14);
        }
        let id = ArmaFilter::identity().transfer_mag_sq(9).unwrap();
        assert!(id.values().iter().all(|v| *v == 1.0));
        let ar = ArmaFilter::new(vec![1.0], vec![0.5]).unwrap().transfer_mag_sq(9).unwrap();
        assert_abs_diff_eq!(ar.values()[0], 4.0, epsilon = 1e-14);
    }

    #[test]
    fn stability_examples() {
        assert!(is_bibo_stable(&[], DEFAULT_STABILITY_MARGIN));
        assert!(is_bibo_stable(&[0.5], DEFAULT_STABILITY_MARGIN));
        assert!(!is_bibo_stable(&[1.0], DEFAULT_STABILITY_MARGIN));
        // z^2 - 1.1 z + 0.3 = (z - 0.5)(z - 0.6)
        assert!(is_bibo_stable(&[1.1, -0.3], DEFAULT_STABILITY_MARGIN));
        let mut p = poles(&[1.1, -0.3]).unwrap();
        p.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_abs_diff_eq!(p[0].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1].re, 0.6, epsilon = 1e-12);
    }

    #[test]
    fn stability_against_known_roots() {
        // (z - 1.2)(z - 0.1): a = [1.3, -0.12]
        assert!(!is_bibo_stable(&[1.3, -0.12], 0.0));
        // z^2 + 0.81: complex pair of modulus 0.9
        assert!(is_bibo_stable(&[0.0, -0.81], 0.0));
        // z^2 + 1.0: complex pair on the unit circle
        assert!(!is_bibo_stable(&[0.0, -1.0], 0.0));
        // (z - 0.5)(z + 0.5)(z - 0.9): z^3 - 0.9 z^2 - 0.25 z + 0.225
        assert!(is_bibo_stable(&[0.9, 0.25, -0.225], 0.0));
        // (z - 0.5)(z + 0.5)(z - 1.05)
        assert!(!is_bibo_stable(&[1.05, 0.25, -0.2625], 0.0));
        assert!(!is_bibo_stable(&[f64::NAN], 0.0));
    }

    #[test]
    fn haar_rotation_of_scalar_is_sign_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let out = haar_rotate(&[2.5], &mut rng);
            assert!(out[0] == 2.5 || out[0] == -2.5);
        }
    }

    #[test]
    fn haar_rotation_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in [2usize, 5, 17, 64] {
            let taps: Vec<f64> = (0..m).map(|i| 1.0 / (1.0 + i as f64)).collect();
            let out = haar_rotate(&taps, &mut rng);
            let (a, b) = (energy(&taps), energy(&out));
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn haar_matrix_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_orthogonal(12, &mut rng);
        let gram = u.transpose() * &u;
        assert!((gram - DMatrix::<f64>::identity(12, 12)).norm() < 1e-12);
    }
}
