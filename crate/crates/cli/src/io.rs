//! CSV panels in and out.
//!
//! A panel file has a header row, a time column first (ISO dates
//! `YYYY-MM-DD` or integers), then one numeric column per series. Empty cells
//! and `NA`/`NaN`/`null` mark missing values; any row containing one is
//! dropped.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use log::warn;
use nalgebra::DMatrix;

use spectral_causality::monitor::Cluster;
use spectral_causality::panel::{TimeSeriesPanel, TimeStamp};

use crate::error::{CliError, Result};

/// Ingested panel plus the number of rows discarded for missing values.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub panel: TimeSeriesPanel,
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.to_ascii_lowercase().as_str(), "" | "na" | "nan" | "null" | "n/a")
}

fn parse_time(cell: &str) -> Option<TimeStamp> {
    if let Ok(i) = cell.parse::<i64>() {
        return Some(TimeStamp::Index(i));
    }
    NaiveDate::parse_from_str(cell, "%Y-%m-%d").ok().map(TimeStamp::Date)
}

pub fn ingest_csv(path: &Path) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_panel(file).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_panel<R: Read>(reader: R) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::data(e.to_string()))?.clone();
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if labels.len() < 2 {
        return Err(CliError::data(format!("need at least 2 series columns, found {}", labels.len())));
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut dropped = 0;
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        // line 1 is the header
        let line = i + 2;
        let record = record.map_err(|e| CliError::data(format!("line {line}: {e}")))?;
        if record.len() != labels.len() + 1 {
            return Err(CliError::data(format!(
                "line {line}: expected {} fields, found {}",
                labels.len() + 1,
                record.len()
            )));
        }
        let stamp = parse_time(&record[0]).ok_or_else(|| {
            CliError::data(format!("line {line}, column '{}': cannot parse '{}' as a date or index", &headers[0], &record[0]))
        })?;
        if let Some(prev) = times.last() {
            if std::mem::discriminant(prev) != std::mem::discriminant(&stamp) {
                return Err(CliError::data(format!("line {line}: time column mixes dates and integer indices")));
            }
        }
        if !seen.insert(stamp) {
            return Err(CliError::data(format!("duplicate timestamp {stamp} at line {line}")));
        }
        if let Some(prev) = times.last() {
            if stamp < *prev {
                return Err(CliError::data(format!("line {line}: timestamp {stamp} is earlier than {prev}")));
            }
        }

        let mut row = Vec::with_capacity(labels.len());
        let mut missing = false;
        for (j, cell) in record.iter().skip(1).enumerate() {
            if is_missing(cell) {
                missing = true;
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::data(format!("line {line}, column '{}': cannot parse '{cell}' as a number", labels[j]))
            })?;
            if v.is_nan() {
                missing = true;
            } else if !v.is_finite() {
                return Err(CliError::data(format!("line {line}, column '{}': non-finite value", labels[j])));
            }
            row.push(v);
        }
        if missing {
            dropped += 1;
        } else {
            times.push(stamp);
            values.push(row);
        }
    }
    if dropped > 0 {
        warn!("dropped {dropped} row(s) with missing values");
    }
    let t = times.len();
    let matrix = DMatrix::from_fn(t, labels.len(), |i, j| values[i][j]);
    let panel = TimeSeriesPanel::new(labels, times, matrix)?;
    Ok(Ingested { panel, dropped_rows: dropped })
}

/// Writes a panel in the format [`read_panel`] accepts. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_panel<W: Write>(panel: &TimeSeriesPanel, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let time_header = match panel.times().first() {
        Some(TimeStamp::Date(_)) => "date",
        _ => "index",
    };
    let header = std::iter::once(time_header.to_string()).chain(panel.labels().iter().cloned());
    w.write_record(header).map_err(|e| CliError::data(e.to_string()))?;
    for (i, stamp) in panel.times().iter().enumerate() {
        let row = std::iter::once(stamp.to_string())
            .chain((0..panel.num_series()).map(|k| panel.value(i, k).to_string()));
        w.write_record(row).map_err(|e| CliError::data(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::data(e.to_string()))
}

/// Reads a `driver,label` file into clusters, ordered by first appearance
/// of each label.
pub fn read_clusters(path: &Path) -> Result<Vec<Cluster>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out: Vec<Cluster> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::data(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if record.len() != 2 {
            return Err(CliError::data(format!("{} line {}: expected driver,label", path.display(), i + 2)));
        }
        let (driver, label) = (record[0].to_string(), record[1].to_string());
        match out.iter_mut().find(|c| c.name == label) {
            Some(c) => c.members.push(driver),
            None => out.push(Cluster { name: label, members: vec![driver] }),
        }
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no clusters", path.display())));
    }
    Ok(out)
}
