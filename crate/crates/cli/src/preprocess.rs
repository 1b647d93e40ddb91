//! Winsorization and standardization of ingested panels.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use spectral_causality::panel::TimeSeriesPanel;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Lower clipping quantile; 0 disables the lower clip.
    pub winsor_low: f64,
    /// Upper clipping quantile; 1 disables the upper clip.
    pub winsor_high: f64,
    pub standardize: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { winsor_low: 0.005, winsor_high: 0.995, standardize: true }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.winsor_low)
            && (0.0..=1.0).contains(&self.winsor_high)
            && self.winsor_low < self.winsor_high;
        if !ok {
            return Err(CliError::config(format!(
                "winsorization quantiles must satisfy 0 <= low < high <= 1, got {} and {}",
                self.winsor_low, self.winsor_high
            )));
        }
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data (the usual "type 7").
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Clips every column to its empirical quantile band, then optionally
/// centers and scales it to unit sample variance. Columns with zero variance
/// after clipping are dropped; their labels are returned.
pub fn preprocess(panel: &TimeSeriesPanel, config: &PreprocessConfig) -> Result<(TimeSeriesPanel, Vec<String>)> {
    config.validate()?;
    let t = panel.len();
    if t < 10 {
        warn!("only {t} observations; quantile clipping is unreliable");
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for k in 0..panel.num_series() {
        let mut col = panel.column(k).to_vec();
        let mut sorted = col.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (quantile(&sorted, config.winsor_low), quantile(&sorted, config.winsor_high));
        col.iter_mut().for_each(|v| *v = v.clamp(lo, hi));

        let mean = col.iter().sum::<f64>() / t as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
        if var <= f64::EPSILON * mean.abs().max(1.0).powi(2) {
            warn!("column '{}' has zero variance and is dropped", panel.labels()[k]);
            dropped.push(panel.labels()[k].clone());
            continue;
        }
        if config.standardize {
            let sd = var.sqrt();
            col.iter_mut().for_each(|v| *v = (*v - mean) / sd);
        }
        kept.push((panel.labels()[k].clone(), col));
    }
    if kept.is_empty() {
        return Err(CliError::data("every column has zero variance"));
    }
    let values = DMatrix::from_fn(t, kept.len(), |i, j| kept[j].1[i]);
    let labels = kept.into_iter().map(|c| c.0).collect();
    Ok((TimeSeriesPanel::new(labels, panel.times().to_vec(), values)?, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(cols: &[Vec<f64>]) -> TimeSeriesPanel {
        TimeSeriesPanel::from_columns((0..cols.len()).map(|i| format!("c{i}")).collect(), cols).unwrap()
    }

    #[test]
    fn quantile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.0), 1.0);
        assert_eq!(quantile(&s, 1.0), 4.0);
        assert!((quantile(&s, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile(&s, 0.1) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn in_range_column_is_untouched_by_clipping() {
        let col: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let cfg = PreprocessConfig { winsor_low: 0.0, winsor_high: 1.0, standardize: false };
        let (out, dropped) = preprocess(&panel(&[col.clone()]), &cfg).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(out.column(0), col.as_slice());
    }

    #[test]
    fn outliers_are_clipped_and_columns_standardized() {
        let mut col: Vec<f64> = (0..400).map(|i| ((i * 7919) % 400) as f64 / 400.0).collect();
        col[17] = 1e6;
        let (out, _) = preprocess(&panel(&[col.clone(), col.iter().map(|v| -v).collect()]), &PreprocessConfig::default())
            .unwrap();
        for k in 0..2 {
            let c = out.column(k);
            let mean = c.iter().sum::<f64>() / 400.0;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 399.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
        // the outlier no longer dominates
        assert!(out.column(0)[17] < 2.0);
    }

    #[test]
    fn constant_column_is_dropped() {
        let col: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let (out, dropped) = preprocess(&panel(&[col, vec![2.0; 30]]), &PreprocessConfig::default()).unwrap();
        assert_eq!(out.num_series(), 1);
        assert_eq!(dropped, ["c1"]);
        assert!(preprocess(&panel(&[vec![2.0; 30]]), &PreprocessConfig::default()).is_err());
    }

    #[test]
    fn bad_quantiles_are_rejected() {
        let cfg = PreprocessConfig { winsor_low: 0.9, winsor_high: 0.1, standardize: true };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
