//! Writers for the CSV and JSON artifacts.
//!
//! Numbers are printed in Rust's shortest round-trip form, and missing values
//! are left as empty cells, so identical inputs give byte-identical files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Collects the relative paths of everything written into one directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub fn cell(v: f64) -> String {
    num(v)
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn open(&mut self, rel: &str) -> Result<BufWriter<File>> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.written.push(rel.to_string());
        Ok(BufWriter::new(file))
    }

    pub fn csv(&mut self, rel: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.root.join(rel);
        let wrap = |e: csv::Error| CliError::Csv { path: path.display().to_string(), source: e };
        let mut w = csv::Writer::from_writer(self.open(rel)?);
        w.write_record(header).map_err(wrap)?;
        for row in rows {
            w.write_record(&row).map_err(wrap)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    /// Square matrix with row and column labels; `None` entries stay empty.
    pub fn matrix(&mut self, rel: &str, labels: &[String], m: &DMatrix<Option<f64>>) -> Result<()> {
        let header: Vec<String> = std::iter::once("target".to_string()).chain(labels.iter().cloned()).collect();
        let rows = (0..m.nrows()).map(|j| {
            std::iter::once(labels[j].clone()).chain((0..m.ncols()).map(|i| opt(m[(j, i)]))).collect()
        });
        self.csv(rel, &header, rows)
    }

    pub fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let path = self.root.join(rel);
        let mut w = self.open(rel)?;
        serde_json::to_writer_pretty(&mut w, value)
            .map_err(|e| CliError::io(&path, std::io::Error::other(e)))?;
        w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_leave_masked_cells_empty() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[None, Some(0.5), Some(1.0), None]);
        out.matrix("net/m.csv", &["a".into(), "b".into()], &m).unwrap();
        let text = fs::read_to_string(dir.path().join("net/m.csv")).unwrap();
        assert_eq!(text, "target,a,b\na,,0.5\nb,1,\n");
        assert_eq!(out.written(), ["net/m.csv"]);
    }
}
