//! Report emission: pretty JSON or flat CSV tables.
//!
//! Output carries no timestamps, so a fixed configuration and seed always
//! produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sic_core::experiments::{BenchResult, ComRow, LagRow};
use sic_core::granger::GrangerReport;
use sic_core::trace::TdrReport;
use sic_core::{SdrReport, WelchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// A report that flattens to a header and rows.
pub trait Tabular {
    fn header(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn strings<const N: usize>(items: [&str; N]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn direction(d: sic_core::Direction) -> String {
    format!("{d:?}")
}

impl Tabular for SdrReport {
    fn header(&self) -> Vec<String> {
        strings(["rho_forward", "rho_backward", "delta", "decision"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.rho_forward.to_string(),
            self.rho_backward.to_string(),
            self.delta.to_string(),
            direction(self.decision),
        ]]
    }
}

/// An inference result together with the settings that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct InferOutput {
    pub welch: WelchConfig,
    pub tie_eps: f64,
    pub floor: f64,
    pub length: usize,
    #[serde(flatten)]
    pub report: SdrReport,
}

impl Tabular for InferOutput {
    fn header(&self) -> Vec<String> {
        let mut h = strings(["window", "overlap", "length"]);
        h.extend(self.report.header());
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let mut row =
            vec![self.welch.segment_length.to_string(), self.welch.overlap_fraction.to_string(), self.length.to_string()];
        row.extend(self.report.rows().remove(0));
        vec![row]
    }
}

impl Tabular for [InferOutput] {
    fn header(&self) -> Vec<String> {
        self.first().map(Tabular::header).unwrap_or_default()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter().flat_map(Tabular::rows).collect()
    }
}

impl Tabular for GrangerReport {
    fn header(&self) -> Vec<String> {
        strings(["p_xy", "p_yx", "f_xy", "f_yx", "lag_order", "decision"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.p_xy.to_string(),
            self.p_yx.to_string(),
            self.f_xy.to_string(),
            self.f_yx.to_string(),
            self.lag_order.to_string(),
            direction(self.decision),
        ]]
    }
}

impl Tabular for [BenchResult] {
    fn header(&self) -> Vec<String> {
        strings([
            "order", "fo", "bo", "variant", "estimator", "trials", "length", "successes", "accuracy", "wilson_lower",
            "wilson_upper",
        ])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| {
                vec![
                    r.order.to_string(),
                    r.fo.to_string(),
                    r.bo.to_string(),
                    format!("{:?}", r.variant),
                    format!("{:?}", r.estimator),
                    r.trials.to_string(),
                    r.length.to_string(),
                    r.successes.to_string(),
                    r.accuracy.to_string(),
                    r.wilson.lower.to_string(),
                    r.wilson.upper.to_string(),
                ]
            })
            .collect()
    }
}

impl Tabular for [LagRow] {
    fn header(&self) -> Vec<String> {
        strings(["k", "sic_accuracy", "sic_lower", "sic_upper", "granger_accuracy", "granger_lower", "granger_upper"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.sic_accuracy.to_string(),
                    r.sic_wilson.lower.to_string(),
                    r.sic_wilson.upper.to_string(),
                    r.granger_accuracy.to_string(),
                    r.granger_wilson.lower.to_string(),
                    r.granger_wilson.upper.to_string(),
                ]
            })
            .collect()
    }
}

impl Tabular for [ComRow] {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["m".to_string()];
        if let Some(first) = self.first() {
            h.extend(first.eps.iter().map(|e| format!("frac_eps_{e}")));
        }
        h.extend(strings(["mean_abs_deviation", "rho_min", "rho_max"]));
        h
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|r| {
                let mut row = vec![r.m.to_string()];
                row.extend(r.fractions.iter().map(f64::to_string));
                row.extend([r.mean_abs_deviation.to_string(), r.rho_min.to_string(), r.rho_max.to_string()]);
                row
            })
            .collect()
    }
}

impl Tabular for TdrReport {
    fn header(&self) -> Vec<String> {
        strings(["order", "tdr", "sdr_reference", "t_n", "output_trace", "output_power", "filter_energy"])
    }

    fn rows(&self) -> Vec<Vec<String>> {
        (0..self.orders.len())
            .map(|i| {
                vec![
                    self.orders[i].to_string(),
                    self.tdr_values[i].to_string(),
                    self.sdr_reference.to_string(),
                    self.t_n_values[i].to_string(),
                    self.output_traces[i].to_string(),
                    self.output_power.to_string(),
                    self.filter_energy.to_string(),
                ]
            })
            .collect()
    }
}

/// Writes `value` as JSON or CSV to `out`, or to stdout when `out` is `None`.
pub fn emit<T>(value: &T, format: OutputFormat, out: Option<&Path>) -> io::Result<()>
where
    T: Serialize + Tabular + ?Sized,
{
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    render(value, format, &mut sink)?;
    sink.flush()
}

pub fn render<T, W>(value: &T, format: OutputFormat, sink: &mut W) -> io::Result<()>
where
    T: Serialize + Tabular + ?Sized,
    W: Write + ?Sized,
{
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *sink, value)?;
            sink.write_all(b"\n")
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(value.header())?;
            for row in value.rows() {
                w.write_record(row)?;
            }
            w.flush()
        }
    }
}
