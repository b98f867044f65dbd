//! CSV and JSON writers.
//!
//! Every file carries the code version, the resolved configuration, the seed
//! and (where a fit is involved) the fit window. JSON documents round-trip
//! losslessly; CSV values are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kickrotor_core::analysis::{SeriesMetadata, TimeSeries};
use kickrotor_core::runner::Histogram;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SERIES_FORMAT: &str = "kickrotor.timeseries";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    /// Stopped early; the data cover the kicks reached before the abort.
    Aborted,
}

/// One ensemble member as stored in JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub n0: i64,
    pub status: RunStatus,
    pub failure: Option<String>,
    pub series: TimeSeries,
}

/// Structured time-series document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub format: String,
    pub code_version: String,
    pub status: RunStatus,
    pub failure: Option<String>,
    pub config: Option<RunConfig>,
    pub fit_window: Option<(u64, u64)>,
    pub series: TimeSeries,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<MemberRecord>,
}

impl SeriesDocument {
    pub fn new(series: TimeSeries, config: Option<RunConfig>) -> Self {
        Self {
            format: SERIES_FORMAT.to_string(),
            code_version: CODE_VERSION.to_string(),
            status: RunStatus::Complete,
            failure: None,
            config,
            fit_window: None,
            series,
            members: Vec::new(),
        }
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_file(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn compact<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output types serialize")
}

/// Comment block shared by all CSV outputs.
fn csv_header(title: &str, doc_status: Option<(RunStatus, Option<&str>)>, config: Option<&RunConfig>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {title}");
    let _ = writeln!(out, "# code_version: {CODE_VERSION}");
    if let Some((status, failure)) = doc_status {
        let _ = writeln!(out, "# status: {}", compact(&status).trim_matches('"'));
        if let Some(f) = failure {
            let _ = writeln!(out, "# failure: {f}");
        }
    }
    if let Some(c) = config {
        let _ = writeln!(out, "# config: {}", compact(c));
    }
    out
}

pub fn series_csv(doc: &SeriesDocument) -> String {
    let mut out = csv_header("kickrotor time series", Some((doc.status, doc.failure.as_deref())), doc.config.as_ref());
    let _ = writeln!(out, "# metadata: {}", compact(&doc.series.metadata));
    if let Some((lo, hi)) = doc.fit_window {
        let _ = writeln!(out, "# fit_window: [{lo}, {hi}]");
    }
    out.push_str("kick_index,energy\n");
    for (t, e) in doc.series.times.iter().zip(&doc.series.energies) {
        let _ = writeln!(out, "{t},{}", format_f64(*e));
    }
    out
}

/// `<stem>.<ext>`, keeping any dots already in the stem.
pub fn with_suffix(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<stem>.csv` and/or `<stem>.json`; returns the paths written.
pub fn write_series(stem: &Path, doc: &SeriesDocument, formats: &[Format]) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    for format in formats {
        let path = match format {
            Format::Csv => {
                let p = with_suffix(stem, "csv");
                write_file(&p, &series_csv(doc))?;
                p
            }
            Format::Json => {
                let p = with_suffix(stem, "json");
                write_json(&p, doc)?;
                p
            }
        };
        written.push(path);
    }
    Ok(written)
}

/// Reads a series from a JSON document or a CSV file written by [`series_csv`].
pub fn read_series(path: &Path) -> CliResult<TimeSeries> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let series = if is_json {
        read_json::<SeriesDocument>(path)?.series
    } else {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        parse_series_csv(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
    };
    series.validate()?;
    Ok(series)
}

pub fn parse_series_csv(text: &str) -> Result<TimeSeries, String> {
    let mut metadata: Option<SeriesMetadata> = None;
    let mut times = Vec::new();
    let mut energies = Vec::new();
    let mut seen_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(json) = comment.trim().strip_prefix("metadata:") {
                metadata = Some(serde_json::from_str(json.trim()).map_err(|e| format!("metadata: {e}"))?);
            }
            continue;
        }
        if !seen_header {
            if line != "kick_index,energy" {
                return Err(format!("line {}: expected header `kick_index,energy`", lineno + 1));
            }
            seen_header = true;
            continue;
        }
        let (t, e) = line.split_once(',').ok_or_else(|| format!("line {}: expected two columns", lineno + 1))?;
        times.push(t.trim().parse::<u64>().map_err(|e| format!("line {}: {e}", lineno + 1))?);
        energies.push(e.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", lineno + 1))?);
    }
    let metadata = metadata.ok_or("missing `# metadata:` header line")?;
    Ok(TimeSeries { times, energies, metadata })
}

/// Histogram CSV: one row per bin, out-of-range counts in the header.
pub fn histogram_csv(
    histogram: &Histogram,
    method: &str,
    fit_window: (u64, u64),
    config: Option<&RunConfig>,
) -> String {
    let mut out = csv_header("kickrotor exponent histogram", None, config);
    let _ = writeln!(out, "# method: {method}");
    let _ = writeln!(out, "# fit_window: [{}, {}]", fit_window.0, fit_window.1);
    let _ = writeln!(out, "# underflow: {}", histogram.underflow);
    let _ = writeln!(out, "# overflow: {}", histogram.overflow);
    out.push_str("bin_lower,bin_upper,count\n");
    for (k, count) in histogram.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{count}", format_f64(histogram.edge(k)), format_f64(histogram.edge(k + 1)));
    }
    out
}

pub fn write_text(path: &Path, contents: &str) -> CliResult<()> {
    write_file(path, contents)
}
