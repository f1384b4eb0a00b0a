//! CSV input and output: point patterns and numeric tables.
//!
//! A pattern file has a `time` header, one event time per row and an
//! optional `# T=<horizon>` line. Numbers are written with 17 significant
//! digits so every emitted file parses back to identical values.

use std::path::Path;

use mtdpp::numeric::format_exact;
use mtdpp::process::{PointPattern, MIN_SPACING};

use crate::error::{CliError, CliResult};

const HORIZON_PREFIX: &str = "# T=";

fn pattern_error(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Input { path: path.to_owned(), line, message: message.into() }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    pattern_error(path, line, e.to_string())
}

/// Read a pattern file; `horizon` overrides the file's `# T=` line.
pub fn read_pattern(path: &Path, horizon: Option<f64>) -> CliResult<PointPattern> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => pattern_error(path, 0, format!("{other:?}")),
        })?;
    let mut times: Vec<f64> = Vec::new();
    let mut file_horizon = None;
    let mut saw_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let first = record.get(0).unwrap_or("");
        if let Some(value) = first.strip_prefix(HORIZON_PREFIX) {
            let t: f64 = value
                .trim()
                .parse()
                .map_err(|_| pattern_error(path, line, format!("cannot parse horizon {value:?}")))?;
            file_horizon = Some(t);
            continue;
        }
        if first.starts_with('#') || (record.len() == 1 && first.is_empty()) {
            continue;
        }
        if !saw_header {
            if first != "time" {
                return Err(pattern_error(path, line, format!("expected header `time`, found {first:?}")));
            }
            saw_header = true;
            continue;
        }
        if record.len() != 1 {
            return Err(pattern_error(path, line, format!("expected one column, found {}", record.len())));
        }
        let t: f64 = first.parse().map_err(|_| pattern_error(path, line, format!("cannot parse time {first:?}")))?;
        if !(t.is_finite() && t > 0.0) {
            return Err(pattern_error(path, line, format!("event time {t} must be finite and positive")));
        }
        if let Some(&prev) = times.last() {
            if (t - prev).abs() < MIN_SPACING {
                return Err(pattern_error(path, line, format!("duplicate event time {t}")));
            }
            if t < prev {
                return Err(pattern_error(path, line, format!("event time {t} precedes {prev}")));
            }
        }
        times.push(t);
    }
    if !saw_header {
        return Err(pattern_error(path, 1, "missing header `time`"));
    }
    let horizon = horizon
        .or(file_horizon)
        .ok_or_else(|| pattern_error(path, 0, "no horizon: add a `# T=<value>` line or set `horizon` in the config"))?;
    Ok(PointPattern::new(times, horizon)?)
}

pub fn write_pattern(path: &Path, pattern: &PointPattern) -> CliResult<()> {
    let mut text = String::from("time\n");
    for &t in pattern.times() {
        text.push_str(&format_exact(t));
        text.push('\n');
    }
    text.push_str(HORIZON_PREFIX);
    text.push_str(&format_exact(pattern.horizon()));
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// A cell in an emitted table.
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Num(v) => format_exact(*v),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> CliResult<()> {
    let to_err = |e: csv::Error| CliError::Core(e.into());
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render)).map_err(to_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Numeric columns of a headed CSV, in header order.
pub fn read_columns(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            col.push(field.parse().map_err(|_| pattern_error(path, line, format!("cannot parse number {field:?}")))?);
        }
    }
    Ok((header, columns))
}
