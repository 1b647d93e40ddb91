//! Linear spectral statistics and dispersion over a lag set.
//!
//! A linear spectral statistic averages a scalar function over an operator's
//! eigenvalues, `L_f = (1/d) Σ_r f(λ_r)`. The scalar dispersion statistic is
//! `max_τ L_f(τ) − min_τ L_f(τ)`; the measure dispersion is the largest
//! 1-Wasserstein distance between per-lag empirical spectral distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::OperatorFamily;

/// Default `ε` of the log-determinant summary.
pub const DEFAULT_LOG_EPS: f64 = 1e-8;

/// Scalar function of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralSummary {
    /// `f(λ) = λ`
    Trace,
    /// `f(λ) = λ²`
    Frobenius,
    /// `f(λ) = log(λ + eps)`
    LogDet { eps: f64 },
    /// `f(λ) = λ^q`
    Power { q: f64 },
    /// `λ₁` itself (not an average).
    LargestEigenvalue,
}

impl SpectralSummary {
    pub fn log_det() -> Self {
        SpectralSummary::LogDet { eps: DEFAULT_LOG_EPS }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralSummary::LogDet { eps } if !(eps > 0.0 && eps.is_finite()) => {
                Err(Error::config(format!("log-det eps must be positive, got {eps}")))
            }
            SpectralSummary::Power { q } if !(q >= 1.0 && q.is_finite()) => {
                Err(Error::config(format!("power summary needs q >= 1, got {q}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SpectralSummary::Trace => "trace".into(),
            SpectralSummary::Frobenius => "frobenius".into(),
            SpectralSummary::LogDet { .. } => "logdet".into(),
            SpectralSummary::Power { q } => format!("power{q}"),
            SpectralSummary::LargestEigenvalue => "lambda1".into(),
        }
    }

    fn apply_unchecked(&self, eigenvalues: &[f64]) -> f64 {
        let d = eigenvalues.len();
        if d == 0 {
            return 0.0;
        }
        let clipped = eigenvalues.iter().map(|&l| l.max(0.0));
        let total: f64 = match *self {
            SpectralSummary::LargestEigenvalue => {
                return eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l));
            }
            SpectralSummary::Trace => clipped.sum(),
            SpectralSummary::Frobenius => clipped.map(|l| l * l).sum(),
            SpectralSummary::LogDet { eps } => clipped.map(|l| (l + eps).ln()).sum(),
            SpectralSummary::Power { q } => clipped.map(|l| l.powf(q)).sum(),
        };
        total / d as f64
    }
}

/// `L_f = (1/d) Σ_r f(λ_r)`; `λ₁` for [`SpectralSummary::LargestEigenvalue`].
/// Round-off negatives are clipped to zero.
pub fn lss(eigenvalues: &[f64], f: SpectralSummary) -> Result<f64> {
    f.validate()?;
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Input("non-finite eigenvalue".into()));
    }
    Ok(f.apply_unchecked(eigenvalues))
}

/// Empirical spectral distribution: `d` equally weighted atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<f64>,
}

impl SpectralMeasure {
    pub fn new(eigenvalues: &[f64]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(eigenvalues.len());
        for &l in eigenvalues {
            if !l.is_finite() || l < -1e-10 {
                return Err(Error::Input(format!("invalid spectral atom {l}")));
            }
            atoms.push(l.max(0.0));
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { atoms })
    }

    /// Ascending atoms.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Exact 1-Wasserstein distance between equal-size empirical measures:
/// mean absolute difference of sorted atoms.
pub fn spectral_measure_distance(a: &SpectralMeasure, b: &SpectralMeasure) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::dim(format!("spectral measures with {} and {} atoms", a.len(), b.len())));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let s: f64 = a.atoms.iter().zip(&b.atoms).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionKind {
    Scalar { summary: SpectralSummary },
    /// Sup of pairwise 1-Wasserstein distances.
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub kind: DispersionKind,
    /// `(lag, L_f(lag))` for scalar dispersion; empty for measure dispersion.
    pub per_lag_values: Vec<(usize, f64)>,
    pub statistic: f64,
    /// Lag attaining the maximum (scalar) or first lag of the arg-max pair (measure).
    pub sup_lag: usize,
    /// Lag attaining the minimum (scalar) or second lag of the arg-max pair (measure).
    pub inf_lag: usize,
}

/// Dispersion of arbitrary per-lag values: `max − min` with the arg-extremes.
pub fn dispersion_of_values(values: &[(usize, f64)], summary: SpectralSummary) -> DispersionResult {
    let (mut sup, mut inf) = (values[0], values[0]);
    for &v in &values[1..] {
        if v.1 > sup.1 {
            sup = v;
        }
        if v.1 < inf.1 {
            inf = v;
        }
    }
    DispersionResult {
        kind: DispersionKind::Scalar { summary },
        per_lag_values: values.to_vec(),
        statistic: (sup.1 - inf.1).max(0.0),
        sup_lag: sup.0,
        inf_lag: inf.0,
    }
}

/// `T_f = max_τ L_f(τ) − min_τ L_f(τ)` over the family's per-lag spectra.
pub fn dispersion_scalar(family: &OperatorFamily, f: SpectralSummary) -> Result<DispersionResult> {
    f.validate()?;
    if family.per_lag.is_empty() {
        return Err(Error::config("empty operator family"));
    }
    let values: Vec<(usize, f64)> =
        family.per_lag.iter().map(|op| (op.lag, f.apply_unchecked(&op.eigenvalues))).collect();
    Ok(dispersion_of_values(&values, f))
}

/// Scalar dispersion computed from pre-extracted spectra, for callers that
/// evaluate several summaries on the same family.
pub(crate) fn dispersion_from_spectra(spectra: &[Vec<f64>], f: SpectralSummary) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for ev in spectra {
        let v = f.apply_unchecked(ev);
        hi = hi.max(v);
        lo = lo.min(v);
    }
    (hi - lo).max(0.0)
}

/// `T_spec = max_{τ₁,τ₂} W₁(μ_{τ₁}, μ_{τ₂})`.
pub fn dispersion_measure(family: &OperatorFamily) -> Result<DispersionResult> {
    if family.per_lag.is_empty() {
        return Err(Error::config("empty operator family"));
    }
    let measures = family
        .per_lag
        .iter()
        .map(|op| SpectralMeasure::new(&op.eigenvalues))
        .collect::<Result<Vec<_>>>()?;
    let lags: Vec<usize> = family.lags().collect();
    let (mut best, mut pair) = (0.0, (lags[0], lags[0]));
    for i in 0..measures.len() {
        for j in (i + 1)..measures.len() {
            let d = spectral_measure_distance(&measures[i], &measures[j])?;
            if d > best {
                best = d;
                pair = (lags[i], lags[j]);
            }
        }
    }
    Ok(DispersionResult {
        kind: DispersionKind::Measure,
        per_lag_values: Vec::new(),
        statistic: best,
        sup_lag: pair.0,
        inf_lag: pair.1,
    })
}

/// `(Σλ)² / Σλ²`, or 0 when the trace is not positive.
pub fn effective_rank(eigenvalues: &[f64]) -> f64 {
    let tr: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let sq: f64 = eigenvalues.iter().map(|l| l.max(0.0).powi(2)).sum();
    if tr <= 0.0 || sq <= 0.0 {
        0.0
    } else {
        tr * tr / sq
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lss_examples() {
        assert_abs_diff_eq!(lss(&[1.0; 5], SpectralSummary::Trace).unwrap(), 1.0);
        assert_abs_diff_eq!(lss(&[3.0, 1.0], SpectralSummary::Frobenius).unwrap(), 5.0);
        assert_eq!(lss(&[3.0, 1.0], SpectralSummary::LargestEigenvalue).unwrap(), 3.0);
        assert!(lss(&[1.0], SpectralSummary::LogDet { eps: 0.0 }).is_err());
        assert!(lss(&[1.0], SpectralSummary::Power { q: 0.5 }).is_err());
    }

    #[test]
    fn power_summary_approaches_top_eigenvalue() {
        let ev = [4.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let d = ev.len() as f64;
        let mut prev = f64::INFINITY;
        for q in [2.0, 4.0, 8.0, 16.0] {
            let v = (d * lss(&ev, SpectralSummary::Power { q }).unwrap()).powf(1.0 / q);
            assert!(v >= 4.0 && v < prev, "q = {q}: {v}");
            prev = v;
        }
        assert!(prev - 4.0 < 1e-3);
    }

    #[test]
    fn dispersion_of_given_values() {
        let r = dispersion_of_values(&[(1, 0.2), (2, 0.7), (3, 0.4)], SpectralSummary::Trace);
        assert_abs_diff_eq!(r.statistic, 0.5, epsilon = 1e-15);
        assert_eq!((r.sup_lag, r.inf_lag), (2, 1));
        let single = dispersion_of_values(&[(4, 0.3)], SpectralSummary::Trace);
        assert_eq!(single.statistic, 0.0);
    }

    #[test]
    fn wasserstein_examples() {
        let m = |v: &[f64]| SpectralMeasure::new(v).unwrap();
        assert_eq!(spectral_measure_distance(&m(&[1.0, 2.0]), &m(&[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(spectral_measure_distance(&m(&[1.0, 0.0]), &m(&[0.0, 1.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(spectral_measure_distance(&m(&[2.0, 0.0]), &m(&[1.0, 1.0])).unwrap(), 1.0);
        assert_abs_diff_eq!(spectral_measure_distance(&m(&[3.0, 1.0]), &m(&[2.0, 1.0])).unwrap(), 0.5);
        assert!(matches!(
            spectral_measure_distance(&m(&[1.0]), &m(&[1.0, 2.0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn effective_rank_examples() {
        assert_abs_diff_eq!(effective_rank(&[0.3; 7]), 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(effective_rank(&[2.5, 0.0, 0.0]), 1.0);
        assert_abs_diff_eq!(effective_rank(&[2.0, 1.0]), 1.8, epsilon = 1e-15);
        assert_eq!(effective_rank(&[0.0, 0.0]), 0.0);
    }
}
