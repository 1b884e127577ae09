//! Synthetic cause-effect pairs from random stable ARMA filters, lag
//! injection, and Wilson score intervals for benchmark accuracies.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_config, invalid_input, Error, Result};
use crate::filters::{is_bibo_stable, ArmaFilter, DEFAULT_STABILITY_MARGIN};
use crate::rng::seeded;
use crate::series::TimeSeries;

/// Standard deviation of sampled coefficients (variance 0.01).
pub const DEFAULT_COEFF_SIGMA: f64 = 0.1;

pub const DEFAULT_MAX_REJECTS: usize = 10_000;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Gaussian prior on the free filter coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoeffPrior {
    /// Standard deviation of the first free coefficient.
    pub sigma: f64,
    /// Optional geometric decay: coefficient `k >= 1` gets standard
    /// deviation `sigma * decay^(k-1)`.
    pub decay: Option<f64>,
}

impl Default for CoeffPrior {
    fn default() -> Self {
        Self { sigma: DEFAULT_COEFF_SIGMA, decay: None }
    }
}

impl CoeffPrior {
    pub fn isotropic(sigma: f64) -> Self {
        Self { sigma, decay: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid_config!("coefficient sigma must be positive, got {}", self.sigma));
        }
        if let Some(d) = self.decay {
            if !(d > 0.0 && d <= 1.0) {
                return Err(invalid_config!("coefficient decay must lie in (0, 1], got {d}"));
            }
        }
        Ok(())
    }

    fn sigma_at(&self, k: usize) -> f64 {
        match self.decay {
            Some(d) => self.sigma * libm::pow(d, (k - 1) as f64),
            None => self.sigma,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (1..=count).map(|k| self.sigma_at(k) * rng.sample::<f64, _>(StandardNormal)).collect()
    }
}

/// Samples an ARMA(`fo`, `bo`) filter with `b0 = 1` and the remaining
/// coefficients drawn from `prior`. The feedback part is redrawn until the
/// filter is BIBO-stable.
pub fn sample_stable_filter<R: Rng + ?Sized>(
    fo: usize,
    bo: usize,
    prior: &CoeffPrior,
    rng: &mut R,
    max_rejects: usize,
) -> Result<ArmaFilter> {
    if fo + bo == 0 {
        return Err(invalid_config!("filter orders must satisfy fo + bo >= 1"));
    }
    prior.validate()?;
    let mut feedforward = Vec::with_capacity(fo + 1);
    feedforward.push(1.0);
    feedforward.extend(prior.draw(fo, rng));
    let mut attempts = 0;
    loop {
        attempts += 1;
        let feedback = prior.draw(bo, rng);
        if is_bibo_stable(&feedback, DEFAULT_STABILITY_MARGIN) {
            return ArmaFilter::new(feedforward, feedback);
        }
        if attempts > max_rejects {
            return Err(Error::SamplingFailure { attempts, acceptance_rate: 0.0 });
        }
    }
}

/// Orders, prior, length, seed and lag describing one synthetic pair.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSpec {
    pub fo_input: usize,
    pub bo_input: usize,
    pub fo_mech: usize,
    pub bo_mech: usize,
    pub prior: CoeffPrior,
    pub length: usize,
    pub seed: u64,
    /// Relative shift of the observed effect; see [`apply_lag`].
    pub lag_k: i64,
}

impl PairSpec {
    /// Input and mechanism share the same ARMA(`fo`, `bo`) orders.
    pub fn symmetric(fo: usize, bo: usize, length: usize, seed: u64) -> Self {
        Self {
            fo_input: fo,
            bo_input: bo,
            fo_mech: fo,
            bo_mech: bo,
            prior: CoeffPrior::default(),
            length,
            seed,
            lag_k: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fo_input + self.bo_input == 0 || self.fo_mech + self.bo_mech == 0 {
            return Err(invalid_config!("each filter needs fo + bo >= 1"));
        }
        if self.length < 64 {
            return Err(invalid_config!("pair length must be at least 64, got {}", self.length));
        }
        if self.lag_k.unsigned_abs() as usize + 64 > self.length {
            return Err(invalid_config!("lag {} leaves fewer than 64 aligned samples", self.lag_k));
        }
        self.prior.validate()
    }
}

/// A generated cause-effect pair together with the filters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub x: TimeSeries,
    pub y: TimeSeries,
    pub input_filter: ArmaFilter,
    pub mechanism: ArmaFilter,
}

/// Generates a pair from `spec`, seeding the generator with `spec.seed`.
pub fn generate_pair(spec: &PairSpec) -> Result<SyntheticPair> {
    generate_pair_with(spec, &mut seeded(spec.seed))
}

/// Generates a pair from `spec` using the supplied generator (`spec.seed`
/// is ignored).
pub fn generate_pair_with<R: Rng + ?Sized>(spec: &PairSpec, rng: &mut R) -> Result<SyntheticPair> {
    spec.validate()?;
    let input_filter = sample_stable_filter(spec.fo_input, spec.bo_input, &spec.prior, rng, DEFAULT_MAX_REJECTS)?;
    let mechanism = sample_stable_filter(spec.fo_mech, spec.bo_mech, &spec.prior, rng, DEFAULT_MAX_REJECTS)?;
    let (x, y) = simulate_pair(&input_filter, &mechanism, spec.length, spec.lag_k, rng)?;
    Ok(SyntheticPair { x, y, input_filter, mechanism })
}

/// `x = input(noise)`, `y = mechanism(x)` with i.i.d. standard normal
/// noise of `length` samples, then [`apply_lag`] with `lag_k`.
pub fn simulate_pair<R: Rng + ?Sized>(
    input: &ArmaFilter,
    mechanism: &ArmaFilter,
    length: usize,
    lag_k: i64,
    rng: &mut R,
) -> Result<(TimeSeries, TimeSeries)> {
    let noise = gaussian_noise(length, rng);
    let x = input.apply(&noise);
    let y = mechanism.apply(&x);
    apply_lag(&x, &y, lag_k)
}

pub fn gaussian_noise<R: Rng + ?Sized>(length: usize, rng: &mut R) -> TimeSeries {
    let samples = (0..length).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    TimeSeries::new(samples).expect("normal draws are finite")
}

/// Shifts the effect relative to the cause and trims both series to the
/// overlapping, equally long range.
///
/// The returned effect is `y~[t] = y[t + k]`: for `k > 0` the effect is
/// observed `k` samples early relative to the cause (equivalently the cause
/// is recorded with a delay of `k`); for `k < 0` the effect is observed late.
/// `|k|` samples are dropped in total.
pub fn apply_lag(x: &TimeSeries, y: &TimeSeries, k: i64) -> Result<(TimeSeries, TimeSeries)> {
    let n = x.len();
    if y.len() != n {
        return Err(invalid_input!("series lengths differ ({n} vs {})", y.len()));
    }
    let shift = k.unsigned_abs() as usize;
    if shift >= n {
        return Err(invalid_input!("lag {k} leaves no overlapping samples"));
    }
    Ok(if k >= 0 { (x.slice(0, n - shift), y.slice(shift, n)) } else { (x.slice(shift, n), y.slice(0, n - shift)) })
}

/// The mechanism `y[t] = c y[t-1] + x[t-1]`.
pub fn lagged_feedback_mechanism(c: f64) -> Result<ArmaFilter> {
    ArmaFilter::new(alloc::vec![0.0, 1.0], alloc::vec![c])
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WilsonInterval {
    pub p_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    pub z: f64,
}

impl WilsonInterval {
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

pub fn wilson_interval(successes: usize, n: usize, z: f64) -> Result<WilsonInterval> {
    if n == 0 || successes > n {
        return Err(invalid_input!("need 0 <= successes <= n and n >= 1, got {successes}/{n}"));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid_input!("z must be positive, got {z}"));
    }
    let nf = n as f64;
    let p_hat = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p_hat + z2 / (2.0 * nf)) / denom;
    let half = z * libm::sqrt(p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf)) / denom;
    let lower = (center - half).clamp(0.0, 1.0).min(p_hat);
    let upper = (center + half).clamp(0.0, 1.0).max(p_hat);
    Ok(WilsonInterval { p_hat, lower, upper, n, z })
}
