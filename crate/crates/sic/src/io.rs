//! Series ingestion (CSV, 16-bit PCM WAV) and CSV export.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use sic_core::TimeSeries;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{path}: file contains no samples")]
    Empty { path: PathBuf },
    #[error("{path}: {msg}")]
    Wav { path: PathBuf, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Wav,
}

impl Format {
    /// `.wav` (any case) is WAV, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("wav") => Format::Wav,
            _ => Format::Csv,
        }
    }
}

/// Reads one or two series from `path`.
pub fn ingest(path: &Path, format: Format) -> Result<Vec<TimeSeries>, IngestError> {
    let io_err = |source| IngestError::Io { path: path.to_path_buf(), source };
    match format {
        Format::Csv => parse_csv(File::open(path).map_err(io_err)?, path),
        Format::Wav => read_wav(BufReader::new(File::open(path).map_err(io_err)?), path).map(|s| vec![s]),
    }
}

/// Optional header row, then one or two numeric columns per row. Blank lines
/// are skipped; every data row must have the same column count.
pub fn parse_csv<R: Read>(reader: R, path: &Path) -> Result<Vec<TimeSeries>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let parse_err =
        |line: u64, msg: String| IngestError::Parse { path: path.to_path_buf(), line, msg };
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(idx as u64 + 1);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match values {
            Ok(v) => v,
            Err(_) if width.is_none() && columns.is_empty() && idx == 0 => continue,
            Err(e) => return Err(parse_err(line, format!("not a number ({e}): {:?}", record.as_slice()))),
        };
        if !(1..=2).contains(&values.len()) {
            return Err(parse_err(line, format!("expected 1 or 2 columns, found {}", values.len())));
        }
        match width {
            None => {
                width = Some(values.len());
                columns = vec![Vec::new(); values.len()];
            }
            Some(w) if w != values.len() => {
                return Err(parse_err(line, format!("expected {w} columns, found {}", values.len())));
            }
            _ => {}
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(parse_err(line, format!("non-finite value {v}")));
        }
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    }
    if columns.is_empty() || columns[0].is_empty() {
        return Err(IngestError::Empty { path: path.to_path_buf() });
    }
    Ok(columns.into_iter().map(|c| TimeSeries::new(c).expect("values checked finite")).collect())
}

/// First channel of a 16-bit integer PCM file, scaled by `1 / 32768`.
pub fn read_wav<R: Read>(reader: R, path: &Path) -> Result<TimeSeries, IngestError> {
    let wav_err = |msg: String| IngestError::Wav { path: path.to_path_buf(), msg };
    let mut wav = hound::WavReader::new(reader).map_err(|e| wav_err(e.to_string()))?;
    let spec = wav.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(wav_err(format!(
            "only 16-bit integer PCM is supported, found {}-bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let channels = usize::from(spec.channels.max(1));
    let samples: Vec<f64> = wav
        .samples::<i16>()
        .step_by(channels)
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<Result<_, _>>()
        .map_err(|e| wav_err(e.to_string()))?;
    if samples.is_empty() {
        return Err(IngestError::Empty { path: path.to_path_buf() });
    }
    TimeSeries::new(samples)
        .and_then(|s| s.with_sample_rate(f64::from(spec.sample_rate)))
        .map_err(|e| wav_err(e.to_string()))
}

/// Writes equally long columns under a header row.
pub fn write_columns<W: Write>(writer: W, header: &[&str], columns: &[&[f64]]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header)?;
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}
