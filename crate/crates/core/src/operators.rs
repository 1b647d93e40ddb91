//! Lag-indexed dependence operators.
//!
//! Two operator variants are supported for every lag `τ`:
//!
//! * the stacked covariance `C(τ) = Cov(Z_t(τ))` of `Z_t(τ) = (V_t, U_t(τ))`,
//! * the directional Gram `C_τ = A_τ A_τᵀ` of the whitened cross-covariance
//!   `A_τ = S_VV^{-1/2} S_VU(τ) S_UU(τ)^{-1/2}`.
//!
//! The singular values of `A_τ` are the canonical correlations between target
//! features and lagged source features.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embedding::{DeformationSet, Embedder, EmbeddingSpec};
use crate::error::{Error, Result};
use crate::linalg::{center_columns, inv_sqrt_psd, SymMatrix, DEFAULT_RANK_TOL};
use crate::panel::TimeSeriesPanel;

/// Ridge added to covariance blocks before whitening or eigen-analysis.
pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    StackedCovariance,
    #[default]
    DirectedCoherenceGram,
}

/// Whitened cross-covariance `A_τ` (targets × sources) with its singular values.
#[derive(Debug, Clone)]
pub struct DirectedCoherence {
    pub matrix: DMatrix<f64>,
    /// Descending, length `min(d_v, d_u)`.
    pub singular_values: Vec<f64>,
}

impl DirectedCoherence {
    fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let small = if matrix.nrows() <= matrix.ncols() {
            SymMatrix::gram(&matrix)
        } else {
            SymMatrix::gram_transpose(&matrix)
        };
        let singular_values = small.eigenvalues().into_iter().map(|l| l.max(0.0).sqrt()).collect();
        Self { matrix, singular_values }
    }

    /// Largest canonical correlation `κ(τ) = ‖A_τ‖₂`.
    pub fn kappa(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Squared Frobenius norm, the lag energy `E_τ`.
    pub fn energy(&self) -> f64 {
        self.matrix.norm_squared()
    }

    /// `A_τ A_τᵀ`.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::gram(&self.matrix)
    }

    /// Eigenvalues of `A_τ A_τᵀ` (squared singular values, zero-padded to `d_v`).
    pub fn gram_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.singular_values.iter().map(|s| s * s).collect();
        ev.resize(self.matrix.nrows(), 0.0);
        ev
    }
}

/// One member of an operator family.
#[derive(Debug, Clone)]
pub struct LagOperator {
    pub lag: usize,
    pub weight: f64,
    pub operator: SymMatrix,
    /// Descending eigenvalues of `operator`, round-off negatives clipped to 0.
    pub eigenvalues: Vec<f64>,
    /// Present for [`OperatorKind::DirectedCoherenceGram`].
    pub coherence: Option<DirectedCoherence>,
}

/// Operators for every lag of a deformation set, built on one shared sample.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    pub kind: OperatorKind,
    pub per_lag: Vec<LagOperator>,
    /// `Σ_τ w_τ · operator(τ)`.
    pub aggregate: SymMatrix,
    pub effective_t: usize,
}

impl OperatorFamily {
    pub fn dim(&self) -> usize {
        self.aggregate.dim()
    }

    pub fn lags(&self) -> impl Iterator<Item = usize> + '_ {
        self.per_lag.iter().map(|o| o.lag)
    }

    pub fn coherences(&self) -> impl Iterator<Item = &DirectedCoherence> + '_ {
        self.per_lag.iter().filter_map(|o| o.coherence.as_ref())
    }
}

fn whitened_cross(
    target_c: &DMatrix<f64>,
    target_whitener: &SymMatrix,
    source_c: &DMatrix<f64>,
    ridge: f64,
) -> Result<DirectedCoherence> {
    let n = target_c.nrows() as f64;
    let suu = SymMatrix::gram_transpose(source_c);
    let suu = SymMatrix::new(suu.into_inner() / n)?.add_ridge(ridge);
    let wu = inv_sqrt_psd(&suu, DEFAULT_RANK_TOL)?;
    let svu = target_c.tr_mul(source_c) / n;
    let a = target_whitener.matrix() * svu * wu.matrix();
    Ok(DirectedCoherence::from_matrix(a))
}

fn clipped_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    m.eigenvalues().into_iter().map(|l| l.max(0.0)).collect()
}

/// Builds operator families for a fixed panel and spec, optionally with the
/// source block circularly shifted. The target side (centered rows and
/// whitening matrix) is computed once and reused for every shift.
#[derive(Debug, Clone)]
pub struct FamilyBuilder<'a> {
    embedder: Embedder<'a>,
    deformation: DeformationSet,
    kind: OperatorKind,
    ridge: f64,
    target_centered: DMatrix<f64>,
    target_whitener: Option<SymMatrix>,
}

impl<'a> FamilyBuilder<'a> {
    pub fn new(
        panel: &'a TimeSeriesPanel,
        spec: &'a EmbeddingSpec,
        deformation: &DeformationSet,
        kind: OperatorKind,
        ridge: f64,
    ) -> Result<Self> {
        Self::aligned(panel, spec, deformation, kind, ridge, deformation.max_lag())
    }

    /// Like [`FamilyBuilder::new`], but aligns on the sample of a larger
    /// maximum lag, so families over nested lag sets share their rows.
    pub fn aligned(
        panel: &'a TimeSeriesPanel,
        spec: &'a EmbeddingSpec,
        deformation: &DeformationSet,
        kind: OperatorKind,
        ridge: f64,
        align_lag: usize,
    ) -> Result<Self> {
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(Error::config("ridge must be finite and nonnegative"));
        }
        if align_lag < deformation.max_lag() {
            return Err(Error::config(format!(
                "alignment lag {align_lag} below the largest lag {}",
                deformation.max_lag()
            )));
        }
        let embedder = Embedder::new(panel, spec, align_lag)?;
        let mut target_centered = embedder.target_rows().clone();
        center_columns(&mut target_centered);
        let target_whitener = match kind {
            OperatorKind::StackedCovariance => None,
            OperatorKind::DirectedCoherenceGram => {
                let n = target_centered.nrows() as f64;
                let svv = SymMatrix::new(target_centered.tr_mul(&target_centered) / n)?.add_ridge(ridge);
                Some(inv_sqrt_psd(&svv, DEFAULT_RANK_TOL)?)
            }
        };
        Ok(Self { embedder, deformation: deformation.clone(), kind, ridge, target_centered, target_whitener })
    }

    pub fn effective_t(&self) -> usize {
        self.embedder.effective_t()
    }

    pub fn deformation(&self) -> &DeformationSet {
        &self.deformation
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    fn lag_operator(&self, lag: usize, weight: f64, shift: usize) -> Result<LagOperator> {
        let mut source = self.embedder.source_rows(lag, shift)?;
        center_columns(&mut source);
        match &self.target_whitener {
            Some(wv) => {
                let coh = whitened_cross(&self.target_centered, wv, &source, self.ridge)?;
                let operator = coh.gram();
                let eigenvalues = coh.gram_eigenvalues();
                Ok(LagOperator { lag, weight, operator, eigenvalues, coherence: Some(coh) })
            }
            None => {
                let n = source.nrows() as f64;
                let dv = self.target_centered.ncols();
                let mut z = DMatrix::zeros(source.nrows(), dv + source.ncols());
                z.columns_mut(0, dv).copy_from(&self.target_centered);
                z.columns_mut(dv, source.ncols()).copy_from(&source);
                let operator = SymMatrix::new(z.tr_mul(&z) / n)?.add_ridge(self.ridge);
                let eigenvalues = clipped_eigenvalues(&operator);
                Ok(LagOperator { lag, weight, operator, eigenvalues, coherence: None })
            }
        }
    }

    /// Family with the source columns read from `X_{(t - shift) mod T}`.
    pub fn build(&self, shift: usize) -> Result<OperatorFamily> {
        let per_lag = self
            .deformation
            .iter()
            .map(|(lag, w)| self.lag_operator(lag, w, shift))
            .collect::<Result<Vec<_>>>()?;
        let dim = per_lag[0].operator.dim();
        let mut aggregate = SymMatrix::zeros(dim);
        for op in &per_lag {
            aggregate = aggregate.add_scaled(op.weight, &op.operator)?;
        }
        Ok(OperatorFamily { kind: self.kind, per_lag, aggregate, effective_t: self.effective_t() })
    }
}

/// Centered, ridge-stabilized covariance of the stacked rows `(V_t, U_t(τ))`.
pub fn build_stacked(panel: &TimeSeriesPanel, spec: &EmbeddingSpec, lag: usize, ridge: f64) -> Result<SymMatrix> {
    let set = DeformationSet::uniform([lag])?;
    let b = FamilyBuilder::new(panel, spec, &set, OperatorKind::StackedCovariance, ridge)?;
    Ok(b.lag_operator(lag, 1.0, 0)?.operator)
}

/// Whitened cross-covariance between targets and sources at `lag`.
pub fn build_coherence(panel: &TimeSeriesPanel, spec: &EmbeddingSpec, lag: usize, ridge: f64) -> Result<DirectedCoherence> {
    let set = DeformationSet::uniform([lag])?;
    let b = FamilyBuilder::new(panel, spec, &set, OperatorKind::DirectedCoherenceGram, ridge)?;
    Ok(b.lag_operator(lag, 1.0, 0)?.coherence.expect("gram kind carries coherence"))
}

/// Operator family over a deformation set, all lags on one aligned sample.
pub fn build_family(
    panel: &TimeSeriesPanel,
    spec: &EmbeddingSpec,
    deformation: &DeformationSet,
    kind: OperatorKind,
    ridge: f64,
) -> Result<OperatorFamily> {
    FamilyBuilder::new(panel, spec, deformation, kind, ridge)?.build(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise_panel(t: usize, k: usize, seed: u64) -> TimeSeriesPanel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeriesPanel::from_matrix(DMatrix::from_fn(t, k, |_, _| StandardNormal.sample(&mut rng))).unwrap()
    }

    #[test]
    fn duplicated_series_gives_equal_blocks() {
        let p = noise_panel(200, 1, 1);
        let spec = EmbeddingSpec::linear(vec![0], vec![0], 1, 1).allowing_overlap();
        let c = build_stacked(&p, &spec, 0, 0.0).unwrap();
        let m = c.matrix();
        assert_abs_diff_eq!(m[(0, 0)], m[(1, 1)], epsilon = 1e-14);
        assert_abs_diff_eq!(m[(0, 0)], m[(0, 1)], epsilon = 1e-14);
    }

    #[test]
    fn constant_series_gives_ridge_identity() {
        let p = TimeSeriesPanel::from_matrix(DMatrix::from_element(30, 1, 4.2)).unwrap();
        let spec = EmbeddingSpec::linear(vec![0], vec![0], 2, 1).allowing_overlap();
        let c = build_stacked(&p, &spec, 1, 1e-8).unwrap();
        assert!((c.matrix() - DMatrix::identity(3, 3) * 1e-8).norm() < 1e-20);
    }

    #[test]
    fn perfect_correlation_has_unit_singular_value() {
        let p = noise_panel(300, 1, 2);
        let spec = EmbeddingSpec::linear(vec![0], vec![0], 1, 1).allowing_overlap();
        let a = build_coherence(&p, &spec, 0, DEFAULT_RIDGE).unwrap();
        assert_abs_diff_eq!(a.kappa(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn scalar_coherence_is_abs_correlation() {
        let p = noise_panel(500, 2, 3);
        let mut vals = p.values().clone();
        for t in 1..500 {
            vals[(t, 1)] += 0.6 * p.value(t - 1, 0);
        }
        let p = TimeSeriesPanel::from_matrix(vals).unwrap();
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 1, 1);
        let a = build_coherence(&p, &spec, 1, 0.0).unwrap();
        let x: Vec<f64> = p.column(0)[..499].to_vec();
        let y: Vec<f64> = p.column(1)[1..].to_vec();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        let corr = sxy / (sxx * syy).sqrt();
        assert_abs_diff_eq!(a.kappa(), corr.abs(), epsilon = 1e-8);
    }

    #[test]
    fn family_singleton_and_aggregate() {
        let p = noise_panel(120, 3, 4);
        let spec = EmbeddingSpec::linear(vec![0, 1], vec![2], 2, 2);
        let set = DeformationSet::new(vec![2], vec![0.5]).unwrap();
        let fam = build_family(&p, &spec, &set, OperatorKind::DirectedCoherenceGram, DEFAULT_RIDGE).unwrap();
        assert_eq!(fam.per_lag.len(), 1);
        let expect = fam.per_lag[0].operator.matrix() * 0.5;
        assert!((fam.aggregate.matrix() - expect).norm() < 1e-12);
    }

    #[test]
    fn gram_eigenvalues_match_eigensolver() {
        let p = noise_panel(150, 4, 5);
        let spec = EmbeddingSpec::linear(vec![0], vec![1, 2, 3], 2, 1);
        let set = DeformationSet::uniform([1, 2, 3]).unwrap();
        let fam = build_family(&p, &spec, &set, OperatorKind::DirectedCoherenceGram, DEFAULT_RIDGE).unwrap();
        for op in &fam.per_lag {
            let es = sym_eig(&op.operator);
            assert_eq!(es.eigenvalues.len(), op.eigenvalues.len());
            for (a, b) in es.eigenvalues.iter().zip(&op.eigenvalues) {
                assert_abs_diff_eq!(a.max(0.0), b, epsilon = 1e-12);
            }
            let sv = &op.coherence.as_ref().unwrap().singular_values;
            assert!(sv.iter().all(|&s| (0.0..=1.0 + 1e-6).contains(&s)));
        }
    }

    #[test]
    fn independent_noise_has_small_cross_block() {
        // Monte Carlo oracle: for independent unit-variance series the sample
        // cross-covariance entries are O(1/√T).
        let t = 20_000;
        let p = noise_panel(t, 2, 6);
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 2, 2);
        let c = build_stacked(&p, &spec, 1, DEFAULT_RIDGE).unwrap();
        let block = c.matrix().view((0, 2), (2, 2));
        let d = 4.0;
        assert!(block.norm() < 3.0 * d / (t as f64).sqrt());
        let a = build_coherence(&p, &spec, 1, DEFAULT_RIDGE).unwrap();
        assert!(a.kappa() < 0.05);
    }
}
