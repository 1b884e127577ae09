//! Benchmark drivers: order sweeps on random ARMA pairs, the time-lag
//! comparison against Granger, concentration under random rotations and the
//! tracial convergence curve.
//!
//! Every driver is a pure function of its configuration and master seed.
//! Trial `t` of sweep point `p` draws from its own stream
//! (`trial_rng(seed, p, t)`), so results do not depend on the runner.

use alloc::vec::Vec;

use crate::error::{invalid_config, Result};
use crate::filters::{energy, haar_rotate, ArmaFilter};
use crate::granger::{granger_test, DEFAULT_LAG_ORDER};
use crate::rng::trial_rng;
use crate::runner::TrialRunner;
use crate::sic::{infer_with, sdr_power_energy, Direction, Estimator, InferConfig, SdrReport};
use crate::spectral::{grid_average, welch_psd};
use crate::synth::{
    apply_lag, gaussian_noise, generate_pair_with, lagged_feedback_mechanism, wilson_interval, CoeffPrior, PairSpec,
    WilsonInterval, Z_95,
};
use crate::trace::{autocovariance_from_spectrum, convergence_curve, TdrReport};

/// Tolerances reported by [`com_experiment`].
pub const EPS_LADDER: [f64; 4] = [0.02, 0.05, 0.1, 0.2];

/// Which coefficients the mechanism (and the input filter) carry at a
/// sweep order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Variant {
    /// `FO = BO = n`.
    #[default]
    Both,
    /// `FO = n`, `BO = 0`: moving-average filters.
    FfOnly,
    /// `FO = 0`, `BO = n`: autoregressive filters.
    FbOnly,
}

impl Variant {
    /// `(feedforward order, feedback order)` at sweep order `n`.
    pub fn orders(self, n: usize) -> (usize, usize) {
        match self {
            Variant::Both => (n, n),
            Variant::FfOnly => (n, 0),
            Variant::FbOnly => (0, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepConfig {
    pub orders: Vec<usize>,
    pub variant: Variant,
    pub trials: usize,
    pub length: usize,
    pub seed: u64,
    pub prior: CoeffPrior,
    /// `None` picks the default Welch settings for `length`.
    pub infer: Option<InferConfig>,
    pub estimator: Estimator,
    pub keep_trials: bool,
}

impl SweepConfig {
    pub fn new(orders: Vec<usize>, variant: Variant, trials: usize, length: usize, seed: u64) -> Self {
        Self {
            orders,
            variant,
            trials,
            length,
            seed,
            prior: CoeffPrior::default(),
            infer: None,
            estimator: Estimator::SpectralRatio,
            keep_trials: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialRecord {
    pub trial: usize,
    pub rho_forward: f64,
    pub rho_backward: f64,
    pub delta: f64,
    pub decision: Direction,
}

/// Freedman-Diaconis histogram: `edges.len() == counts.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

const MAX_BINS: usize = 1000;

impl Histogram {
    pub fn freedman_diaconis(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return Self { edges: Vec::new(), counts: Vec::new() };
        }
        v.sort_by(f64::total_cmp);
        let (lo, hi) = (v[0], v[v.len() - 1]);
        let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
        let width = 2.0 * iqr / libm::cbrt(v.len() as f64);
        let bins = if hi > lo && width > 0.0 {
            (libm::ceil((hi - lo) / width) as usize).clamp(1, MAX_BINS)
        } else {
            1
        };
        let span = if hi > lo { hi - lo } else { 1.0 };
        let step = span / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { lo + span } else { lo + step * i as f64 }).collect();
        let mut counts = alloc::vec![0; bins];
        for x in &v {
            let idx = (((x - lo) / step) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchResult {
    pub order: usize,
    pub fo: usize,
    pub bo: usize,
    pub variant: Variant,
    pub trials: usize,
    pub length: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub successes: usize,
    pub accuracy: f64,
    pub wilson: WilsonInterval,
    pub delta_histogram: Histogram,
    pub per_trial: Option<Vec<TrialRecord>>,
}

/// Runs `trials` generated pairs per order and counts `XtoY` decisions.
pub fn order_sweep<R: TrialRunner>(cfg: &SweepConfig, runner: &R) -> Result<Vec<BenchResult>> {
    if cfg.trials == 0 {
        return Err(invalid_config!("trials must be at least 1"));
    }
    if cfg.orders.is_empty() || cfg.orders.contains(&0) {
        return Err(invalid_config!("orders must be a nonempty list of positive integers"));
    }
    let infer_cfg = cfg.infer.unwrap_or_else(|| InferConfig::for_length(cfg.length));
    infer_cfg.welch.validate(cfg.length)?;
    cfg.orders
        .iter()
        .enumerate()
        .map(|(point, &order)| {
            let (fo, bo) = cfg.variant.orders(order);
            let spec = PairSpec {
                fo_input: fo,
                bo_input: bo,
                fo_mech: fo,
                bo_mech: bo,
                prior: cfg.prior,
                length: cfg.length,
                seed: cfg.seed,
                lag_k: 0,
            };
            spec.validate()?;
            let records: Vec<Result<TrialRecord>> = runner.run(cfg.trials, |trial| {
                let mut rng = trial_rng(cfg.seed, point as u32, trial as u32);
                let pair = generate_pair_with(&spec, &mut rng)?;
                let report = match cfg.estimator {
                    Estimator::SpectralRatio => infer_with(&pair.x, &pair.y, &infer_cfg)?,
                    Estimator::PowerEnergy => {
                        power_energy_report(&pair.x, &pair.y, &pair.mechanism, &infer_cfg)?
                    }
                };
                Ok(TrialRecord {
                    trial,
                    rho_forward: report.rho_forward,
                    rho_backward: report.rho_backward,
                    delta: report.delta,
                    decision: report.decision,
                })
            });
            let records = records.into_iter().collect::<Result<Vec<_>>>()?;
            let successes = records.iter().filter(|r| r.decision == Direction::XtoY).count();
            let deltas: Vec<f64> = records.iter().map(|r| r.delta).collect();
            Ok(BenchResult {
                order,
                fo,
                bo,
                variant: cfg.variant,
                trials: cfg.trials,
                length: cfg.length,
                seed: cfg.seed,
                estimator: cfg.estimator,
                successes,
                accuracy: successes as f64 / cfg.trials as f64,
                wilson: wilson_interval(successes, cfg.trials, Z_95)?,
                delta_histogram: Histogram::freedman_diaconis(&deltas),
                per_trial: cfg.keep_trials.then_some(records),
            })
        })
        .collect()
}

/// Ratios with the mechanism known: `P(Y) / (P(X) <|h|^2>)` forward and
/// `P(X) / (P(Y) <1/|h|^2>)` backward, averages on the Welch grid.
fn power_energy_report(
    x: &crate::TimeSeries,
    y: &crate::TimeSeries,
    mechanism: &ArmaFilter,
    cfg: &InferConfig,
) -> Result<SdrReport> {
    let px = grid_average(welch_psd(x, &cfg.welch)?.values());
    let py = grid_average(welch_psd(y, &cfg.welch)?.values());
    let h2 = mechanism.transfer_mag_sq(cfg.welch.grid_len())?;
    let gain = grid_average(h2.values());
    let inv_gain = grid_average(&h2.values().iter().map(|v| 1.0 / v).collect::<Vec<_>>());
    let forward = sdr_power_energy(px, py, gain)?;
    let backward = sdr_power_energy(py, px, inv_gain)?;
    Ok(SdrReport::new(forward, backward, cfg.tie_eps, Estimator::PowerEnergy))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LagConfig {
    pub c: f64,
    pub lags: Vec<i64>,
    pub trials: usize,
    pub length: usize,
    pub seed: u64,
    pub lag_order: usize,
    pub infer: Option<InferConfig>,
}

impl LagConfig {
    pub fn new(c: f64, lags: Vec<i64>, trials: usize, length: usize, seed: u64) -> Self {
        Self { c, lags, trials, length, seed, lag_order: DEFAULT_LAG_ORDER, infer: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LagRow {
    pub k: i64,
    pub sic_accuracy: f64,
    pub granger_accuracy: f64,
    pub sic_wilson: WilsonInterval,
    pub granger_wilson: WilsonInterval,
}

/// White-noise cause, mechanism `y[t] = c y[t-1] + x[t-1]`, effect observed
/// with shift `k` (see [`apply_lag`]). Each trial reuses one realization for
/// every lag.
pub fn lag_experiment<R: TrialRunner>(cfg: &LagConfig, runner: &R) -> Result<Vec<LagRow>> {
    if cfg.c == 0.0 || !cfg.c.is_finite() {
        return Err(invalid_config!("c must be nonzero and finite, got {}", cfg.c));
    }
    if cfg.trials == 0 || cfg.lags.is_empty() {
        return Err(invalid_config!("need at least one trial and one lag"));
    }
    let max_shift = cfg.lags.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
    if cfg.length < max_shift + 64 {
        return Err(invalid_config!("length {} too short for lag {max_shift}", cfg.length));
    }
    let mechanism = lagged_feedback_mechanism(cfg.c)?;
    let infer_cfg = cfg.infer.unwrap_or_else(|| InferConfig::for_length(cfg.length - max_shift));
    infer_cfg.welch.validate(cfg.length - max_shift)?;

    // outcomes[trial][lag] = (sic correct, granger correct)
    let outcomes: Vec<Result<Vec<(bool, bool)>>> = runner.run(cfg.trials, |trial| {
        let mut rng = trial_rng(cfg.seed, 0, trial as u32);
        let x = gaussian_noise(cfg.length, &mut rng);
        let y = mechanism.apply(&x);
        cfg.lags
            .iter()
            .map(|&k| {
                let (xs, ys) = apply_lag(&x, &y, k)?;
                let sic = infer_with(&xs, &ys, &infer_cfg)?.decision == Direction::XtoY;
                let granger = granger_test(&xs, &ys, cfg.lag_order)?.decision == Direction::XtoY;
                Ok((sic, granger))
            })
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    cfg.lags
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let sic = outcomes.iter().filter(|o| o[i].0).count();
            let granger = outcomes.iter().filter(|o| o[i].1).count();
            let n = cfg.trials as f64;
            Ok(LagRow {
                k,
                sic_accuracy: sic as f64 / n,
                granger_accuracy: granger as f64 / n,
                sic_wilson: wilson_interval(sic, cfg.trials, Z_95)?,
                granger_wilson: wilson_interval(granger, cfg.trials, Z_95)?,
            })
        })
        .collect()
}

/// Tap vector that gets rotated in [`com_experiment`].
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BaseTaps {
    /// `e_0` of length `m`.
    #[default]
    UnitImpulse,
    /// `[1, 1, ..., 1] / sqrt(m)`.
    Flat,
}

impl BaseTaps {
    pub fn taps(&self, m: usize) -> Vec<f64> {
        match self {
            BaseTaps::UnitImpulse => {
                let mut t = alloc::vec![0.0; m];
                t[0] = 1.0;
                t
            }
            BaseTaps::Flat => alloc::vec![1.0 / libm::sqrt(m as f64); m],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ComConfig {
    pub m_values: Vec<usize>,
    pub base: BaseTaps,
    pub input: ArmaFilter,
    pub rotations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComRow {
    pub m: usize,
    /// Fraction of rotations with `|rho - 1| <= eps`, aligned with `eps`.
    pub fractions: Vec<f64>,
    pub eps: Vec<f64>,
    pub mean_abs_deviation: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

/// For each `m`, rotates the base taps by Haar-random orthogonal matrices and
/// evaluates `rho = h^T Sigma_m h / (C(0) ||h||^2)` against the analytic
/// input autocovariance.
pub fn com_experiment<R: TrialRunner>(cfg: &ComConfig, runner: &R) -> Result<Vec<ComRow>> {
    if cfg.m_values.is_empty() || cfg.m_values.contains(&0) {
        return Err(invalid_config!("m values must be a nonempty list of positive integers"));
    }
    if cfg.m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid_config!("m values must be strictly ascending"));
    }
    if cfg.rotations == 0 {
        return Err(invalid_config!("rotations must be at least 1"));
    }
    let max_m = cfg.m_values[cfg.m_values.len() - 1];
    let autocov = autocovariance_from_spectrum(&cfg.input, max_m)?;
    let px = autocov[0];
    cfg.m_values
        .iter()
        .enumerate()
        .map(|(point, &m)| {
            let base = cfg.base.taps(m);
            let rhos: Vec<Result<f64>> = runner.run(cfg.rotations, |trial| {
                let mut rng = trial_rng(cfg.seed, point as u32, trial as u32);
                let h = haar_rotate(&base, &mut rng);
                let py: f64 = (0..m)
                    .map(|i| h[i] * (0..m).map(|j| autocov[i.abs_diff(j)] * h[j]).sum::<f64>())
                    .sum();
                sdr_power_energy(px, py, energy(&h))
            });
            let rhos = rhos.into_iter().collect::<Result<Vec<_>>>()?;
            let n = rhos.len() as f64;
            let fractions = EPS_LADDER
                .iter()
                .map(|eps| rhos.iter().filter(|r| libm::fabs(*r - 1.0) <= *eps).count() as f64 / n)
                .collect();
            Ok(ComRow {
                m,
                fractions,
                eps: EPS_LADDER.to_vec(),
                mean_abs_deviation: rhos.iter().map(|r| libm::fabs(r - 1.0)).sum::<f64>() / n,
                rho_min: rhos.iter().copied().fold(f64::INFINITY, f64::min),
                rho_max: rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}

/// Tracial convergence curve of `f` under the input spectrum of
/// `input_spec`.
pub fn trace_convergence_experiment(f: &ArmaFilter, input_spec: &ArmaFilter, orders: &[usize]) -> Result<TdrReport> {
    convergence_curve(f, input_spec, orders)
}
