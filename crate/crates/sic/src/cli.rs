//! Command-line definitions and subcommand drivers.
//!
//! Exit codes: 0 success, 1 IO or other failure, 2 usage, 3 parse error in
//! an input file, 4 length mismatch, 5 degenerate data, 6 invalid
//! configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sic_core::experiments::{
    com_experiment, lag_experiment, order_sweep, trace_convergence_experiment, BaseTaps, ComConfig, LagConfig,
    SweepConfig, Variant,
};
use sic_core::granger::{granger_test, DEFAULT_LAG_ORDER};
use sic_core::sic::{infer_with, InferConfig, DEFAULT_FLOOR, DEFAULT_TIE_EPS};
use sic_core::synth::{generate_pair, CoeffPrior, PairSpec, DEFAULT_COEFF_SIGMA};
use sic_core::{ArmaFilter, Detrend, Estimator, TimeSeries, WelchConfig, Window};

use crate::io::{ingest, write_columns, Format, IngestError};
use crate::parallel::Rayon;
use crate::report::{emit, InferOutput, OutputFormat};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{0}")]
    LengthMismatch(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sic_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use sic_core::Error as E;
        match self {
            CliError::Ingest(IngestError::Io { .. }) | CliError::Io(_) | CliError::Other(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Ingest(_) => 3,
            CliError::LengthMismatch(_) => 4,
            CliError::Core(E::DegenerateSpectrum(_) | E::SingularFit(_)) => 5,
            CliError::Core(E::InvalidInput(_) | E::InvalidConfig(_) | E::Unstable { .. }) => 6,
            CliError::Core(_) => 1,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "sic", version, about = "Spectral independence criterion for cause-effect inference on time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer the causal direction between two series.
    Infer(InferArgs),
    /// Generate a synthetic cause-effect pair.
    Synth(SynthArgs),
    /// Accuracy sweep over filter orders on synthetic pairs.
    Bench(BenchArgs),
    /// SIC against Granger under a measurement lag.
    Lag(LagArgs),
    /// Concentration of the dependency ratio under random rotations.
    Com(ComArgs),
    /// Tracial ratio of truncated systems against the spectral limit.
    Trace(TraceArgs),
    /// Bivariate Granger test with a forced decision.
    Granger(GrangerArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowFn {
    Hann,
    Hamming,
    Rectangular,
}

impl From<WindowFn> for Window {
    fn from(w: WindowFn) -> Self {
        match w {
            WindowFn::Hann => Window::Hann,
            WindowFn::Hamming => Window::Hamming,
            WindowFn::Rectangular => Window::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Both,
    FfOnly,
    FbOnly,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Both => Variant::Both,
            VariantArg::FfOnly => Variant::FfOnly,
            VariantArg::FbOnly => Variant::FbOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Spectral,
    PowerEnergy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaseArg {
    Unit,
    Flat,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WelchArgs {
    /// Welch segment length; defaults to min(256, len/4).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
    #[arg(long, value_enum, default_value_t = WindowFn::Hann)]
    pub window_fn: WindowFn,
    #[arg(long, default_value_t = DEFAULT_TIE_EPS)]
    pub tie_eps: f64,
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
}

impl WelchArgs {
    fn config(&self, len: usize, window: Option<usize>) -> InferConfig {
        let base = WelchConfig::for_length(len);
        InferConfig {
            welch: WelchConfig {
                segment_length: window.or(self.window).unwrap_or(base.segment_length),
                overlap_fraction: self.overlap,
                window: self.window_fn.into(),
                detrend: Detrend::Mean,
            },
            tie_eps: self.tie_eps,
            floor: self.floor,
        }
    }
}

#[derive(Debug, Args)]
pub struct PairInput {
    /// Cause candidate; a two-column CSV supplies both series.
    pub x: PathBuf,
    /// Effect candidate.
    pub y: Option<PathBuf>,
    /// Truncate the longer series instead of failing on unequal lengths.
    #[arg(long)]
    pub truncate: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: PairInput,
    #[command(flatten)]
    pub welch: WelchArgs,
    /// Run once per segment length in a list or range, e.g. `50:150`.
    #[arg(long)]
    pub sweep_windows: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    #[arg(long, default_value_t = DEFAULT_COEFF_SIGMA)]
    pub coeff_sigma: f64,
    /// Geometric decay of the coefficient standard deviation with lag.
    #[arg(long)]
    pub coeff_decay: Option<f64>,
}

impl PriorArgs {
    fn prior(&self) -> CoeffPrior {
        CoeffPrior { sigma: self.coeff_sigma, decay: self.coeff_decay }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Filter order for input and mechanism.
    #[arg(long, default_value_t = 5)]
    pub orders: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    /// Observe the effect shifted by this many samples.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub lag: i64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// `csv` writes the x,y columns; `json` adds the generating filters.
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Orders as a list or range, e.g. `2,5,10,20` or `2:21`.
    #[arg(long, default_value = "2,5,10,20")]
    pub orders: String,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Spectral)]
    pub estimator: EstimatorArg,
    /// Include every trial's ratios in the JSON output.
    #[arg(long)]
    pub per_trial: bool,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub welch: WelchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LagArgs {
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value = "-2,-1,0,1,2,5", allow_hyphen_values = true)]
    pub lags: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    #[arg(long, default_value_t = DEFAULT_LAG_ORDER)]
    pub lag_order: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub welch: WelchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Input feedforward coefficients `b0,b1,...`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub input_b: String,
    /// Input feedback coefficients `a1,a2,...`; empty for FIR.
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    pub input_a: String,
}

impl FilterArgs {
    fn input(&self) -> CliResult<ArmaFilter> {
        Ok(ArmaFilter::new(parse_reals(&self.input_b)?, parse_reals(&self.input_a)?)?)
    }
}

#[derive(Debug, Args)]
pub struct ComArgs {
    #[arg(long, default_value = "8,16,32,64")]
    pub m: String,
    #[arg(long, default_value_t = 2000)]
    pub rotations: usize,
    #[arg(long, value_enum, default_value_t = BaseArg::Unit)]
    pub base: BaseArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub filters: FilterArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Mechanism feedforward coefficients.
    #[arg(long, default_value = "1,0.5", allow_hyphen_values = true)]
    pub b: String,
    /// Mechanism feedback coefficients.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, default_value = "8,16,32,64,128,256,512")]
    pub orders: String,
    #[command(flatten)]
    pub filters: FilterArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GrangerArgs {
    #[command(flatten)]
    pub input: PairInput,
    #[arg(long, default_value_t = DEFAULT_LAG_ORDER)]
    pub lag_order: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Comma-separated integers or an inclusive range `a:b` / `a:b:step`.
pub fn parse_ints<T>(text: &str) -> CliResult<Vec<T>>
where
    T: TryFrom<i64>,
{
    let bad = |why: &str| CliError::Usage(format!("invalid list {text:?}: {why}"));
    let num = |s: &str| i64::from_str(s.trim()).map_err(|e| bad(&e.to_string()));
    let values: Vec<i64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, s] => (num(a)?, num(b)?, num(s)?),
            _ => return Err(bad("expected a:b or a:b:step")),
        };
        if step <= 0 || hi < lo {
            return Err(bad("range must be ascending with a positive step"));
        }
        (lo..=hi).step_by(step as usize).collect()
    } else {
        text.split(',').map(num).collect::<CliResult<_>>()?
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    values.into_iter().map(|v| T::try_from(v).map_err(|_| bad(&format!("{v} out of range")))).collect()
}

/// Comma-separated reals; the empty string is the empty list.
pub fn parse_reals(text: &str) -> CliResult<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("invalid number {s:?}: {e}"))))
        .collect()
}

fn load_pair(input: &PairInput) -> CliResult<(TimeSeries, TimeSeries)> {
    let mut series = ingest(&input.x, Format::from_path(&input.x))?;
    let (x, y) = match (&input.y, series.len()) {
        (Some(y_path), 1) => {
            let mut ys = ingest(y_path, Format::from_path(y_path))?;
            if ys.len() != 1 {
                return Err(CliError::Usage(format!("{} must hold a single column", y_path.display())));
            }
            (series.remove(0), ys.remove(0))
        }
        (None, 2) => {
            let y = series.pop().expect("two columns");
            (series.pop().expect("two columns"), y)
        }
        (Some(_), _) => return Err(CliError::Usage("with two files each must hold a single column".into())),
        (None, _) => return Err(CliError::Usage("a single file must hold two columns".into())),
    };
    if x.len() == y.len() {
        return Ok((x, y));
    }
    if !input.truncate {
        return Err(CliError::LengthMismatch(format!(
            "series lengths differ ({} vs {}); pass --truncate to use the common prefix",
            x.len(),
            y.len()
        )));
    }
    let n = x.len().min(y.len());
    log::warn!("truncating both series to {n} samples");
    Ok((x.slice(0, n), y.slice(0, n)))
}

fn runner() -> CliResult<Rayon> {
    Rayon::from_env().map_err(|e| CliError::Other(e.to_string()))
}

fn out_path(o: &OutputArgs) -> Option<&Path> {
    o.out.as_deref()
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Infer(a) => cmd_infer(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Lag(a) => cmd_lag(&a),
        Command::Com(a) => cmd_com(&a),
        Command::Trace(a) => cmd_trace(&a),
        Command::Granger(a) => cmd_granger(&a),
    }
}

pub fn cmd_infer(a: &InferArgs) -> CliResult {
    let (x, y) = load_pair(&a.input)?;
    let windows: Vec<Option<usize>> = match &a.sweep_windows {
        Some(spec) => parse_ints::<usize>(spec)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let outputs = windows
        .into_iter()
        .map(|w| {
            let cfg = a.welch.config(x.len(), w);
            cfg.welch.validate(x.len())?;
            let report = infer_with(&x, &y, &cfg)?;
            Ok(InferOutput { welch: cfg.welch, tie_eps: cfg.tie_eps, floor: cfg.floor, length: x.len(), report })
        })
        .collect::<CliResult<Vec<_>>>()?;
    if a.sweep_windows.is_some() {
        emit(outputs.as_slice(), a.output.format, out_path(&a.output))?;
    } else {
        emit(&outputs[0], a.output.format, out_path(&a.output))?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct SynthOutput<'a> {
    spec: &'a PairSpec,
    input_filter: &'a ArmaFilter,
    mechanism: &'a ArmaFilter,
    x: &'a [f64],
    y: &'a [f64],
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult {
    let (fo, bo) = Variant::from(a.variant).orders(a.orders);
    let spec = PairSpec {
        fo_input: fo,
        bo_input: bo,
        fo_mech: fo,
        bo_mech: bo,
        prior: a.prior.prior(),
        length: a.length,
        seed: a.seed,
        lag_k: a.lag,
    };
    let pair = generate_pair(&spec)?;
    let sink: Box<dyn std::io::Write> = match &a.output.out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match a.output.format {
        OutputFormat::Csv => write_columns(sink, &["x", "y"], &[pair.x.samples(), pair.y.samples()])
            .map_err(|e| CliError::Io(e.into()))?,
        OutputFormat::Json => {
            let out = SynthOutput {
                spec: &spec,
                input_filter: &pair.input_filter,
                mechanism: &pair.mechanism,
                x: pair.x.samples(),
                y: pair.y.samples(),
            };
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &out).map_err(|e| CliError::Io(e.into()))?;
            sink.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult {
    let mut cfg = SweepConfig::new(parse_ints(&a.orders)?, a.variant.into(), a.trials, a.length, a.seed);
    cfg.prior = a.prior.prior();
    cfg.infer = Some(a.welch.config(a.length, None));
    cfg.estimator = match a.estimator {
        EstimatorArg::Spectral => Estimator::SpectralRatio,
        EstimatorArg::PowerEnergy => Estimator::PowerEnergy,
    };
    cfg.keep_trials = a.per_trial;
    let results = order_sweep(&cfg, &runner()?)?;
    emit(results.as_slice(), a.output.format, out_path(&a.output))?;
    Ok(())
}

pub fn cmd_lag(a: &LagArgs) -> CliResult {
    let mut cfg = LagConfig::new(a.c, parse_ints(&a.lags)?, a.trials, a.length, a.seed);
    cfg.lag_order = a.lag_order;
    let max_shift = cfg.lags.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0);
    cfg.infer = Some(a.welch.config(a.length.saturating_sub(max_shift), None));
    let rows = lag_experiment(&cfg, &runner()?)?;
    emit(rows.as_slice(), a.output.format, out_path(&a.output))?;
    Ok(())
}

pub fn cmd_com(a: &ComArgs) -> CliResult {
    let cfg = ComConfig {
        m_values: parse_ints(&a.m)?,
        base: match a.base {
            BaseArg::Unit => BaseTaps::UnitImpulse,
            BaseArg::Flat => BaseTaps::Flat,
        },
        input: a.filters.input()?,
        rotations: a.rotations,
        seed: a.seed,
    };
    let rows = com_experiment(&cfg, &runner()?)?;
    emit(rows.as_slice(), a.output.format, out_path(&a.output))?;
    Ok(())
}

pub fn cmd_trace(a: &TraceArgs) -> CliResult {
    let mech = ArmaFilter::new(parse_reals(&a.b)?, parse_reals(&a.a)?)?;
    let orders: Vec<usize> = parse_ints(&a.orders)?;
    let report = trace_convergence_experiment(&mech, &a.filters.input()?, &orders)?;
    emit(&report, a.output.format, out_path(&a.output))?;
    Ok(())
}

pub fn cmd_granger(a: &GrangerArgs) -> CliResult {
    let (x, y) = load_pair(&a.input)?;
    let report = granger_test(&x, &y, a.lag_order)?;
    emit(&report, a.output.format, out_path(&a.output))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_lists_and_ranges() {
        assert_eq!(parse_ints::<usize>("2,5,10").unwrap(), vec![2, 5, 10]);
        assert_eq!(parse_ints::<i64>("-2:2").unwrap(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(parse_ints::<usize>("50:150:50").unwrap(), vec![50, 100, 150]);
        assert!(parse_ints::<usize>("-1").is_err());
        assert!(parse_ints::<usize>("5:2").is_err());
        assert!(parse_ints::<usize>("x").is_err());
    }

    #[test]
    fn real_lists() {
        assert_eq!(parse_reals("1, 0.5").unwrap(), vec![1.0, 0.5]);
        assert!(parse_reals("").unwrap().is_empty());
        assert!(parse_reals("1,,2").is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Other(String::new()).exit_code(),
            CliError::Usage(String::new()).exit_code(),
            CliError::Ingest(IngestError::Empty { path: PathBuf::new() }).exit_code(),
            CliError::LengthMismatch(String::new()).exit_code(),
            CliError::Core(sic_core::Error::DegenerateSpectrum(String::new())).exit_code(),
            CliError::Core(sic_core::Error::InvalidConfig(String::new())).exit_code(),
        ];
        assert_eq!(codes, [1, 2, 3, 4, 5, 6]);
    }
}
