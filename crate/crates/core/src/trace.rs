//! Truncated Toeplitz systems and the tracial dependency ratio.
//!
//! A truncated system of order `N` keeps `2N` consecutive input and output
//! samples: `Y' = H X'` with `H` the `2N x 2N` causal Toeplitz matrix of
//! filter taps and `X'` carrying the Toeplitz autocovariance `Sigma_X`. The
//! tracial ratio `tau(H Sigma H^T) / (tau(Sigma) tau(H H^T))`, with `tau` the
//! normalized trace, tends to the spectral ratio as `N` grows.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid_input, Error, Result};
use crate::fft::Fft;
use crate::filters::{ArmaFilter, ImpulseResponse};
use crate::spectral::grid_average;

/// Grid size for the quadrature reference ratio.
pub const QUADRATURE_GRID: usize = (1 << 14) + 1;

/// Tail tolerance used when expanding ARMA filters into taps.
pub const IMPULSE_TAIL_TOL: f64 = 1e-12;

const MIN_AUTOCOV_GRID: usize = 1 << 14;

/// `H` and `Sigma_X` of a truncated system of order `N` (both `2N x 2N`).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSystem {
    order: usize,
    h: DMatrix<f64>,
    sigma_x: DMatrix<f64>,
    taps: Vec<f64>,
    autocov: Vec<f64>,
}

/// `H_ij = h_{i-j}` and `Sigma_ij = C(|i-j|)`; `autocov` must hold at least
/// `2N` lags.
pub fn build_truncated(h: &ImpulseResponse, autocov: &[f64], order: usize) -> Result<TruncatedSystem> {
    if order == 0 {
        return Err(invalid_input!("truncation order must be at least 1"));
    }
    let dim = 2 * order;
    if autocov.len() < dim {
        return Err(invalid_input!("order {order} needs {dim} autocovariance lags, got {}", autocov.len()));
    }
    if autocov.iter().any(|c| !c.is_finite()) {
        return Err(invalid_input!("autocovariance must be finite"));
    }
    let taps: Vec<f64> = h.taps.iter().copied().take(dim).collect();
    let h_mat = DMatrix::from_fn(dim, dim, |i, j| if i >= j { taps.get(i - j).copied().unwrap_or(0.0) } else { 0.0 });
    let sigma = DMatrix::from_fn(dim, dim, |i, j| autocov[i.abs_diff(j)]);
    Ok(TruncatedSystem { order, h: h_mat, sigma_x: sigma, taps, autocov: autocov[..dim].to_vec() })
}

impl TruncatedSystem {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        2 * self.order
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn sigma_x(&self) -> &DMatrix<f64> {
        &self.sigma_x
    }

    /// `tau(Sigma_X)`.
    pub fn input_trace(&self) -> f64 {
        self.autocov[0]
    }

    /// `tau(H Sigma_X H^T)`.
    pub fn output_trace(&self) -> f64 {
        output_trace(&self.taps, &self.autocov, self.order)
    }

    /// `tau(H H^T)`.
    pub fn filter_trace(&self) -> f64 {
        t_n(&self.taps, self.order)
    }

    /// Eigenvalues of `Sigma_X`, ascending.
    pub fn sigma_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.sigma_x.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Tracial dependency ratio of a truncated system.
pub fn tdr(sys: &TruncatedSystem) -> Result<f64> {
    tdr_parts(&sys.taps, &sys.autocov, sys.order)
}

fn tdr_parts(taps: &[f64], autocov: &[f64], order: usize) -> Result<f64> {
    let input = autocov[0];
    let filter = t_n(taps, order);
    if !(input > 0.0) {
        return Err(Error::DegenerateSpectrum(alloc::format!("input trace is {input}")));
    }
    if !(filter > 0.0) {
        return Err(Error::DegenerateSpectrum(alloc::format!("filter trace is {filter}")));
    }
    Ok(output_trace(taps, autocov, order) / (input * filter))
}

/// Row `i` of `H Sigma H^T` on the diagonal is the quadratic form of the
/// leading `min(i, L-1) + 1` taps against the Toeplitz covariance, so the
/// whole trace needs the `L` nested forms only.
fn output_trace(taps: &[f64], autocov: &[f64], order: usize) -> f64 {
    let dim = 2 * order;
    let len = taps.len().min(dim);
    let mut forms = Vec::with_capacity(len);
    let mut q = 0.0;
    for m in 0..len {
        let cross: f64 = (0..m).map(|a| taps[a] * autocov[m - a]).sum();
        q += taps[m] * (taps[m] * autocov[0] + 2.0 * cross);
        forms.push(q);
    }
    let full = forms.last().copied().unwrap_or(0.0);
    let head: f64 = forms.iter().sum();
    (head + full * (dim - len) as f64) / dim as f64
}

/// `T_N = sum_{k < 2N} h_k^2 (2N - k) / 2N`.
fn t_n(taps: &[f64], order: usize) -> f64 {
    let dim = 2 * order;
    taps.iter().take(dim).enumerate().map(|(k, h)| h * h * (dim - k) as f64).sum::<f64>() / dim as f64
}

/// `T_N` for each requested order.
pub fn t_n_sequence(h: &ImpulseResponse, orders: &[usize]) -> Vec<f64> {
    orders.iter().map(|&n| t_n(&h.taps, n)).collect()
}

/// Autocovariance `C(0..lags)` of the filter's output under unit white-noise
/// input, from an inverse FFT of `|h(nu)|^2` on a fine grid.
pub fn autocovariance_from_spectrum(filter: &ArmaFilter, lags: usize) -> Result<Vec<f64>> {
    if lags == 0 {
        return Ok(Vec::new());
    }
    let decay = filter.impulse_response(IMPULSE_TAIL_TOL)?.len();
    let m = (16 * lags).max(8 * decay).max(MIN_AUTOCOV_GRID).next_power_of_two();
    let mut buf: Vec<Complex64> =
        (0..m).map(|k| Complex64::new(filter.frequency_response(k as f64 / m as f64).norm_sqr(), 0.0)).collect();
    Fft::new(m).inverse(&mut buf);
    Ok(buf.iter().take(lags).map(|c| c.re / m as f64).collect())
}

/// Spectral ratio `<S_xx |h|^2> / (<S_xx> <|h|^2>)` by quadrature, with
/// `S_xx = |g|^2` for the input filter `g`.
pub fn sdr_quadrature(input: &ArmaFilter, mechanism: &ArmaFilter) -> Result<f64> {
    let sxx = input.transfer_mag_sq(QUADRATURE_GRID)?;
    let h2 = mechanism.transfer_mag_sq(QUADRATURE_GRID)?;
    let syy: Vec<f64> = sxx.values().iter().zip(h2.values()).map(|(s, h)| s * h).collect();
    let den = grid_average(sxx.values()) * grid_average(h2.values());
    if !(den > 0.0) {
        return Err(Error::DegenerateSpectrum("input or filter has zero power".into()));
    }
    Ok(grid_average(&syy) / den)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TdrReport {
    pub orders: Vec<usize>,
    pub tdr_values: Vec<f64>,
    pub sdr_reference: f64,
    pub t_n_values: Vec<f64>,
    /// `tau(H Sigma_X H^T)` per order.
    pub output_traces: Vec<f64>,
    /// `tau(Sigma_X) = C_xx(0)`.
    pub input_power: f64,
    /// Output power of the untruncated system by quadrature.
    pub output_power: f64,
    /// `||h||^2` of the full impulse response.
    pub filter_energy: f64,
}

/// Tracial ratio of mechanism `f` driven by the output of `input_spec`
/// (under unit white noise) at each order, next to the quadrature limit.
pub fn convergence_curve(f: &ArmaFilter, input_spec: &ArmaFilter, orders: &[usize]) -> Result<TdrReport> {
    if orders.is_empty() || orders.contains(&0) {
        return Err(invalid_input!("orders must be a nonempty list of positive integers"));
    }
    let max_order = orders.iter().copied().max().unwrap_or(1);
    let h = f.impulse_response(IMPULSE_TAIL_TOL)?;
    let autocov = autocovariance_from_spectrum(input_spec, 2 * max_order)?;
    let mut tdr_values = Vec::with_capacity(orders.len());
    let mut output_traces = Vec::with_capacity(orders.len());
    for &n in orders {
        tdr_values.push(tdr_parts(&h.taps, &autocov, n)?);
        output_traces.push(output_trace(&h.taps, &autocov, n));
    }
    let sxx = input_spec.transfer_mag_sq(QUADRATURE_GRID)?;
    let h2 = f.transfer_mag_sq(QUADRATURE_GRID)?;
    let syy: Vec<f64> = sxx.values().iter().zip(h2.values()).map(|(s, g)| s * g).collect();
    Ok(TdrReport {
        orders: orders.to_vec(),
        tdr_values,
        sdr_reference: sdr_quadrature(input_spec, f)?,
        t_n_values: t_n_sequence(&h, orders),
        output_traces,
        input_power: autocov[0],
        output_power: grid_average(&syy),
        filter_energy: h.energy(),
    })
}

/// Dense `tau(H Sigma H^T) / (tau(Sigma) tau(H H^T))` from the materialized
/// matrices.
pub fn tdr_dense(sys: &TruncatedSystem) -> f64 {
    let dim = sys.dim() as f64;
    let out = (&sys.h * &sys.sigma_x * sys.h.transpose()).trace() / dim;
    let hh = (&sys.h * sys.h.transpose()).trace() / dim;
    out / (sys.sigma_x.trace() / dim * hh)
}

/// Closed-form `C(tau) = a^|tau| / (1 - a^2)` of a unit-innovation AR(1).
pub fn ar1_autocovariance(a: f64, lags: usize) -> Vec<f64> {
    let scale = 1.0 / (1.0 - a * a);
    let mut out = vec![0.0; lags];
    let mut p = 1.0;
    for c in out.iter_mut() {
        *c = p * scale;
        p *= a;
    }
    out
}
