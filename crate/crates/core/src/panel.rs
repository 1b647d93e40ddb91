//! Aligned multivariate time series.

use std::fmt;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time stamp of one panel row: a calendar date or a plain integer index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStamp {
    Index(i64),
    Date(NaiveDate),
}

impl fmt::Display for TimeStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeStamp::Index(i) => write!(f, "{i}"),
            TimeStamp::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

/// `T × K` panel of finite observations with component labels and a strictly
/// increasing time index.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    labels: Vec<String>,
    times: Vec<TimeStamp>,
    values: DMatrix<f64>,
}

impl TimeSeriesPanel {
    pub fn new(labels: Vec<String>, times: Vec<TimeStamp>, values: DMatrix<f64>) -> Result<Self> {
        let (t, k) = values.shape();
        if labels.len() != k {
            return Err(Error::dim(format!("{} labels for {k} columns", labels.len())));
        }
        if times.len() != t {
            return Err(Error::dim(format!("{} time stamps for {t} rows", times.len())));
        }
        if t < 2 {
            return Err(Error::InsufficientData { needed: 2, available: t });
        }
        if k < 1 {
            return Err(Error::data("panel has no columns"));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::data(format!("time index not strictly increasing at {}", w[1])));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at row {}, column {}",
                pos % t,
                pos / t
            )));
        }
        Ok(Self { labels, times, values })
    }

    /// Panel indexed `0..T` with labels `x0, x1, ...`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let labels = (0..values.ncols()).map(|i| format!("x{i}")).collect();
        let times = (0..values.nrows() as i64).map(TimeStamp::Index).collect();
        Self::new(labels, times, values)
    }

    /// Builds a panel from equal-length columns.
    pub fn from_columns(labels: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        let t = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != t) {
            return Err(Error::dim("columns have different lengths"));
        }
        let values = DMatrix::from_fn(t, columns.len(), |i, j| columns[j][i]);
        let times = (0..t as i64).map(TimeStamp::Index).collect();
        Self::new(labels, times, values)
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn num_series(&self) -> usize {
        self.values.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn times(&self) -> &[TimeStamp] {
        &self.times
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn value(&self, t: usize, k: usize) -> f64 {
        self.values[(t, k)]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        let t = self.len();
        &self.values.as_slice()[k * t..(k + 1) * t]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Rows `start..end` as a new panel.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if end > self.len() || start >= end {
            return Err(Error::config(format!("invalid row range {start}..{end}")));
        }
        Self::new(
            self.labels.clone(),
            self.times[start..end].to_vec(),
            self.values.rows(start, end - start).into_owned(),
        )
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.num_series()) {
            return Err(Error::config(format!("column {bad} out of range")));
        }
        Self::new(
            cols.iter().map(|&c| self.labels[c].clone()).collect(),
            self.times.clone(),
            self.values.select_columns(cols),
        )
    }

    pub(crate) fn with_values(&self, values: DMatrix<f64>) -> Self {
        debug_assert_eq!(values.shape(), self.values.shape());
        Self { labels: self.labels.clone(), times: self.times.clone(), values }
    }
}
