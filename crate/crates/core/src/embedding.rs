//! Lag embedding, feature maps, circular shifts and residualization.
//!
//! For a source lag `τ` and source depth `p_u`, the raw source vector at time
//! `t` is the stacked block `(X_{t-τ}, X_{t-τ-1}, …, X_{t-τ-p_u+1})` restricted
//! to the source columns, laid out lag-major: entry `(ℓ-1)·|I| + i` holds
//! column `i` at embedding position `ℓ`. Targets use the same layout with
//! `(X_t, …, X_{t-p_v+1})`. Feature maps act on the whole stacked block.
//!
//! Every lag of a [`DeformationSet`] shares one aligned sample: rows start at
//! the first time index where the largest lag is fully observed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::center_columns;
use crate::panel::TimeSeriesPanel;

/// Coordinate-wise scalar transform used by [`FeatureMap::Transforms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarTransform {
    Identity,
    Square,
    Cube,
    Abs,
    Tanh,
    Sin,
    Cos,
}

impl ScalarTransform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ScalarTransform::Identity => x,
            ScalarTransform::Square => x * x,
            ScalarTransform::Cube => x * x * x,
            ScalarTransform::Abs => x.abs(),
            ScalarTransform::Tanh => x.tanh(),
            ScalarTransform::Sin => x.sin(),
            ScalarTransform::Cos => x.cos(),
        }
    }
}

/// Deterministic map from a raw lag block to a fixed-dimension feature vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureMap {
    #[default]
    Identity,
    /// All monomials of total degree `1..=max_degree`, graded then
    /// lexicographic: `(z₀, …, z_{n-1}, z₀², z₀z₁, …, z_{n-1}², …)`.
    Monomials { max_degree: usize },
    /// Every transform applied to every coordinate (coordinate-major), then
    /// optionally all pairwise products `z_a z_b` with `a < b` of the raw inputs.
    Transforms { transforms: Vec<ScalarTransform>, pairwise_products: bool },
}

/// Multisets of input indices, one per output monomial.
fn monomial_terms(n: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for term in &frontier {
            let start = term.last().copied().unwrap_or(0);
            for i in start..n {
                let mut t = term.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl FeatureMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            FeatureMap::Monomials { max_degree } if *max_degree == 0 => {
                Err(Error::config("monomial feature map needs max_degree >= 1"))
            }
            FeatureMap::Transforms { transforms, pairwise_products }
                if transforms.is_empty() && !pairwise_products =>
            {
                Err(Error::config("transform feature map produces no features"))
            }
            _ => Ok(()),
        }
    }

    /// Output dimension for an input block of dimension `n`.
    pub fn output_dim(&self, n: usize) -> usize {
        match self {
            FeatureMap::Identity => n,
            FeatureMap::Monomials { max_degree } => {
                (1..=*max_degree).map(|d| binomial(n + d - 1, d)).sum()
            }
            FeatureMap::Transforms { transforms, pairwise_products } => {
                n * transforms.len() + if *pairwise_products { n * n.saturating_sub(1) / 2 } else { 0 }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = DMatrix::from_row_slice(1, x.len(), x);
        self.apply_rows(&m).row(0).iter().copied().collect()
    }

    /// Applies the map to every row of an `n_rows × n` matrix.
    pub fn apply_rows(&self, raw: &DMatrix<f64>) -> DMatrix<f64> {
        let (rows, n) = raw.shape();
        match self {
            FeatureMap::Identity => raw.clone(),
            FeatureMap::Monomials { max_degree } => {
                let terms = monomial_terms(n, *max_degree);
                let mut out = DMatrix::zeros(rows, terms.len());
                for (c, term) in terms.iter().enumerate() {
                    let mut col = raw.column(term[0]).into_owned();
                    for &i in &term[1..] {
                        col.component_mul_assign(&raw.column(i));
                    }
                    out.set_column(c, &col);
                }
                out
            }
            FeatureMap::Transforms { transforms, pairwise_products } => {
                let mut out = DMatrix::zeros(rows, self.output_dim(n));
                let mut c = 0;
                for i in 0..n {
                    for tr in transforms {
                        out.set_column(c, &raw.column(i).map(|v| tr.apply(v)));
                        c += 1;
                    }
                }
                if *pairwise_products {
                    for a in 0..n {
                        for b in (a + 1)..n {
                            out.set_column(c, &raw.column(a).component_mul(&raw.column(b)));
                            c += 1;
                        }
                    }
                }
                out
            }
        }
    }
}

/// Finite set of admissible lags with positive aggregation weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationSet {
    lags: Vec<usize>,
    weights: Vec<f64>,
}

impl DeformationSet {
    pub fn new(lags: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::config("lag set must be nonempty"));
        }
        if lags.len() != weights.len() {
            return Err(Error::config("one weight per lag required"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::config("lag weights must be positive"));
        }
        let mut pairs: Vec<(usize, f64)> = lags.into_iter().zip(weights).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::config("lags must be distinct"));
        }
        let (lags, weights) = pairs.into_iter().unzip();
        Ok(Self { lags, weights })
    }

    /// Unit weights on every lag.
    pub fn uniform(lags: impl IntoIterator<Item = usize>) -> Result<Self> {
        let lags: Vec<usize> = lags.into_iter().collect();
        let w = vec![1.0; lags.len()];
        Self::new(lags, w)
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().expect("nonempty")
    }

    pub fn min_lag(&self) -> usize {
        self.lags[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.lags.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Which panel columns play the source and target roles, and how they are embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub source_indices: Vec<usize>,
    pub target_indices: Vec<usize>,
    /// Number of stacked source lags `p_u` (at least 1).
    pub source_depth: usize,
    /// Number of stacked target lags `p_v`; 0 and 1 both mean contemporaneous only.
    pub target_depth: usize,
    #[serde(default)]
    pub source_map: FeatureMap,
    #[serde(default)]
    pub target_map: FeatureMap,
    /// Columns whose span is projected out of both blocks.
    #[serde(default)]
    pub conditioning_indices: Vec<usize>,
    /// Number of stacked conditioning lags (`W_t, …, W_{t-c+1}`).
    #[serde(default = "one")]
    pub conditioning_depth: usize,
    /// Permit source and target sets to share columns.
    #[serde(default)]
    pub allow_overlap: bool,
}

fn one() -> usize {
    1
}

impl EmbeddingSpec {
    /// Identity maps, no conditioning.
    pub fn linear(source: Vec<usize>, target: Vec<usize>, source_depth: usize, target_depth: usize) -> Self {
        Self {
            source_indices: source,
            target_indices: target,
            source_depth,
            target_depth,
            source_map: FeatureMap::Identity,
            target_map: FeatureMap::Identity,
            conditioning_indices: Vec::new(),
            conditioning_depth: 1,
            allow_overlap: false,
        }
    }

    pub fn with_source_map(mut self, map: FeatureMap) -> Self {
        self.source_map = map;
        self
    }

    pub fn with_target_map(mut self, map: FeatureMap) -> Self {
        self.target_map = map;
        self
    }

    pub fn with_conditioning(mut self, indices: Vec<usize>, depth: usize) -> Self {
        self.conditioning_indices = indices;
        self.conditioning_depth = depth;
        self
    }

    pub fn allowing_overlap(mut self) -> Self {
        self.allow_overlap = true;
        self
    }

    pub fn target_lags(&self) -> usize {
        self.target_depth.max(1)
    }

    pub fn source_dim(&self) -> usize {
        self.source_map.output_dim(self.source_depth * self.source_indices.len())
    }

    pub fn target_dim(&self) -> usize {
        self.target_map.output_dim(self.target_lags() * self.target_indices.len())
    }

    pub fn validate(&self, num_series: usize) -> Result<()> {
        if self.source_indices.is_empty() || self.target_indices.is_empty() {
            return Err(Error::config("source and target index sets must be nonempty"));
        }
        if self.source_depth == 0 {
            return Err(Error::config("source depth must be at least 1"));
        }
        if !self.conditioning_indices.is_empty() && self.conditioning_depth == 0 {
            return Err(Error::config("conditioning depth must be at least 1"));
        }
        let all = self
            .source_indices
            .iter()
            .chain(&self.target_indices)
            .chain(&self.conditioning_indices);
        if let Some(bad) = all.into_iter().find(|&&i| i >= num_series) {
            return Err(Error::config(format!("column index {bad} out of range (K = {num_series})")));
        }
        if !self.allow_overlap && self.source_indices.iter().any(|i| self.target_indices.contains(i)) {
            return Err(Error::config(
                "source and target sets overlap; set allow_overlap to test self-dependence",
            ));
        }
        self.source_map.validate()?;
        self.target_map.validate()
    }

    /// First aligned row for a largest lag of `max_lag`.
    pub fn first_row(&self, max_lag: usize) -> usize {
        let cond = if self.conditioning_indices.is_empty() { 0 } else { self.conditioning_depth - 1 };
        (max_lag + self.source_depth - 1).max(self.target_lags() - 1).max(cond)
    }
}

/// Feature rows for one lag.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub target_rows: DMatrix<f64>,
    pub source_rows: DMatrix<f64>,
    pub effective_t: usize,
}

/// Raw lag block `(X_{t-offset}, …, X_{t-offset-depth+1})` restricted to `cols`,
/// for rows `t = start..T`. With a nonzero `shift`, values are read from the
/// circularly shifted series `X_{(t-shift) mod T}`.
fn lag_block(panel: &TimeSeriesPanel, cols: &[usize], start: usize, offset: usize, depth: usize, shift: usize) -> DMatrix<f64> {
    let t_len = panel.len();
    let n = t_len - start;
    let width = cols.len();
    let mut out = DMatrix::zeros(n, depth * width);
    for l in 0..depth {
        for (ci, &c) in cols.iter().enumerate() {
            let series = panel.column(c);
            let mut dst = out.column_mut(l * width + ci);
            let first = start - offset - l;
            if shift == 0 {
                dst.copy_from_slice(&series[first..first + n]);
            } else {
                for r in 0..n {
                    let src = (first + r + t_len - shift % t_len) % t_len;
                    dst[r] = series[src];
                }
            }
        }
    }
    out
}

/// Orthonormal basis of the centered column span, used for projections.
#[derive(Debug, Clone)]
struct Projector {
    basis: DMatrix<f64>,
}

impl Projector {
    fn new(conditioning: &DMatrix<f64>) -> Self {
        let mut c = conditioning.clone();
        center_columns(&mut c);
        if c.ncols() == 0 || c.nrows() == 0 {
            return Self { basis: DMatrix::zeros(c.nrows(), 0) };
        }
        let (rows, cols) = c.shape();
        let svd = c.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
        let tol = smax * 1e-12 * (rows.max(cols) as f64);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol && smax > 0.0)
            .collect();
        Self { basis: u.select_columns(&keep) }
    }

    /// Residual of `rows` after regression on the basis plus an intercept.
    fn residualize(&self, rows: &DMatrix<f64>) -> DMatrix<f64> {
        let mut r = rows.clone();
        center_columns(&mut r);
        if self.basis.ncols() > 0 {
            let coef = self.basis.tr_mul(&r);
            r -= &self.basis * coef;
        }
        r
    }
}

/// Residuals of `rows` after least-squares regression on `conditioning_rows`
/// and an intercept. Rank-deficient conditioning sets are handled through the
/// pseudo-inverse.
pub fn residualize(rows: &DMatrix<f64>, conditioning_rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if rows.nrows() != conditioning_rows.nrows() {
        return Err(Error::dim(format!(
            "residualize: {} rows vs {} conditioning rows",
            rows.nrows(),
            conditioning_rows.nrows()
        )));
    }
    Ok(Projector::new(conditioning_rows).residualize(rows))
}

/// Rotates the listed columns by `k` with wraparound:
/// `(S_k X)_t = X_{(t - k) mod T}`. Other columns and the time index are untouched.
pub fn circular_shift(panel: &TimeSeriesPanel, indices: &[usize], k: usize) -> Result<TimeSeriesPanel> {
    let t = panel.len();
    if let Some(&bad) = indices.iter().find(|&&c| c >= panel.num_series()) {
        return Err(Error::config(format!("column {bad} out of range")));
    }
    let k = k % t;
    let mut values = panel.values().clone();
    for &c in indices {
        let src = panel.column(c);
        let mut dst = values.column_mut(c);
        for i in 0..t {
            dst[(i + k) % t] = src[i];
        }
    }
    Ok(panel.with_values(values))
}

/// Prepared embedding for a fixed panel, spec and lag set.
///
/// Target rows (and the conditioning projector) do not depend on the source
/// lag or on circular shifts of the source, so they are built once.
#[derive(Debug, Clone)]
pub struct Embedder<'a> {
    panel: &'a TimeSeriesPanel,
    spec: &'a EmbeddingSpec,
    start: usize,
    target_rows: DMatrix<f64>,
    projector: Option<Projector>,
}

impl<'a> Embedder<'a> {
    /// Aligns on the sample where lags up to `max_lag` are fully observed.
    pub fn new(panel: &'a TimeSeriesPanel, spec: &'a EmbeddingSpec, max_lag: usize) -> Result<Self> {
        spec.validate(panel.num_series())?;
        let start = spec.first_row(max_lag);
        let available = panel.len().saturating_sub(start);
        if available < 2 {
            return Err(Error::InsufficientData { needed: start + 2, available: panel.len() });
        }
        let projector = if spec.conditioning_indices.is_empty() {
            None
        } else {
            let w = lag_block(panel, &spec.conditioning_indices, start, 0, spec.conditioning_depth, 0);
            Some(Projector::new(&w))
        };
        let raw = lag_block(panel, &spec.target_indices, start, 0, spec.target_lags(), 0);
        let mut target_rows = spec.target_map.apply_rows(&raw);
        if let Some(p) = &projector {
            target_rows = p.residualize(&target_rows);
        }
        Ok(Self { panel, spec, start, target_rows, projector })
    }

    pub fn effective_t(&self) -> usize {
        self.panel.len() - self.start
    }

    pub fn first_row(&self) -> usize {
        self.start
    }

    pub fn target_rows(&self) -> &DMatrix<f64> {
        &self.target_rows
    }

    /// Source feature rows at `lag`, reading the source columns circularly
    /// shifted by `shift`.
    pub fn source_rows(&self, lag: usize, shift: usize) -> Result<DMatrix<f64>> {
        if lag + self.spec.source_depth - 1 > self.start {
            return Err(Error::config(format!("lag {lag} exceeds the aligned sample's maximum lag")));
        }
        let raw = lag_block(self.panel, &self.spec.source_indices, self.start, lag, self.spec.source_depth, shift);
        let mut rows = self.spec.source_map.apply_rows(&raw);
        if let Some(p) = &self.projector {
            rows = p.residualize(&rows);
        }
        Ok(rows)
    }
}

/// Aligned target and source feature rows for a single lag.
pub fn embed(panel: &TimeSeriesPanel, spec: &EmbeddingSpec, lag: usize) -> Result<Embedding> {
    let e = Embedder::new(panel, spec, lag)?;
    let source_rows = e.source_rows(lag, 0)?;
    Ok(Embedding { effective_t: e.effective_t(), target_rows: e.target_rows, source_rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::TimeSeriesPanel;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn ramp_panel(t: usize, k: usize) -> TimeSeriesPanel {
        TimeSeriesPanel::from_matrix(DMatrix::from_fn(t, k, |i, j| (i as f64) + 100.0 * j as f64)).unwrap()
    }

    #[test]
    fn embed_index_arithmetic() {
        let p = ramp_panel(10, 2);
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 1, 1);
        let e = embed(&p, &spec, 2).unwrap();
        assert_eq!(e.effective_t, 8);
        assert_eq!(e.source_rows.nrows(), 8);
        assert_eq!(e.target_rows.nrows(), 8);
        for r in 0..8 {
            let t = r + 2;
            assert_eq!(e.source_rows[(r, 0)], (t - 2) as f64);
            assert_eq!(e.target_rows[(r, 0)], 100.0 + t as f64);
        }
    }

    #[test]
    fn lag_zero_is_contemporaneous() {
        let p = ramp_panel(6, 2);
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 1, 0);
        let e = embed(&p, &spec, 0).unwrap();
        assert_eq!(e.effective_t, 6);
        assert_eq!(e.source_rows.column(0).as_slice(), p.column(0));
        assert_eq!(e.target_rows.column(0).as_slice(), p.column(1));
    }

    #[test]
    fn lag_major_layout() {
        let p = ramp_panel(12, 3);
        let spec = EmbeddingSpec::linear(vec![0, 1], vec![2], 3, 2);
        let e = embed(&p, &spec, 1).unwrap();
        // first row is t = 1 + 3 - 1 = 3
        assert_eq!(e.effective_t, 9);
        let row: Vec<f64> = e.source_rows.row(0).iter().copied().collect();
        assert_eq!(row, vec![2.0, 102.0, 1.0, 101.0, 0.0, 100.0]);
        let trow: Vec<f64> = e.target_rows.row(0).iter().copied().collect();
        assert_eq!(trow, vec![203.0, 202.0]);
    }

    #[test]
    fn insufficient_length_errors() {
        let p = ramp_panel(5, 2);
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 3, 1);
        assert!(matches!(embed(&p, &spec, 2), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn overlap_needs_flag() {
        let p = ramp_panel(8, 2);
        let spec = EmbeddingSpec::linear(vec![0, 1], vec![1], 1, 1);
        assert!(matches!(embed(&p, &spec, 1), Err(Error::Config(_))));
        assert!(embed(&p, &spec.allowing_overlap(), 1).is_ok());
    }

    #[test]
    fn monomials_of_scalar() {
        let m = FeatureMap::Monomials { max_degree: 2 };
        assert_eq!(m.apply(&[3.0]), vec![3.0, 9.0]);
        assert_eq!(m.output_dim(1), 2);
        assert_eq!(m.apply(&[2.0, 5.0]), vec![2.0, 5.0, 4.0, 10.0, 25.0]);
        assert_eq!(m.output_dim(5), 20);
        let cubic = FeatureMap::Monomials { max_degree: 3 };
        assert_eq!(cubic.output_dim(2), 2 + 3 + 4);
        assert_eq!(cubic.apply(&[2.0, 5.0]).len(), 9);
    }

    #[test]
    fn transform_map_layout() {
        let m = FeatureMap::Transforms {
            transforms: vec![ScalarTransform::Identity, ScalarTransform::Square],
            pairwise_products: true,
        };
        assert_eq!(m.apply(&[2.0, -3.0]), vec![2.0, 4.0, -3.0, 9.0, -6.0]);
        assert_eq!(m.output_dim(2), 5);
        let empty = FeatureMap::Transforms { transforms: vec![], pairwise_products: false };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn circular_shift_examples() {
        let p = TimeSeriesPanel::from_columns(
            vec!["a".into(), "b".into()],
            &[vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0]],
        )
        .unwrap();
        assert_eq!(circular_shift(&p, &[0], 0).unwrap(), p);
        assert_eq!(circular_shift(&p, &[0], 4).unwrap(), p);
        let s = circular_shift(&p, &[0], 1).unwrap();
        assert_eq!(s.column(0), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.column(1), p.column(1));
        assert_eq!(s.times(), p.times());
    }

    #[test]
    fn shifted_embedding_matches_shifted_panel() {
        let p = TimeSeriesPanel::from_matrix(DMatrix::from_fn(20, 3, |i, j| ((i * 7 + j * 3) % 11) as f64)).unwrap();
        let spec = EmbeddingSpec::linear(vec![0, 1], vec![2], 2, 2);
        let e = Embedder::new(&p, &spec, 3).unwrap();
        let shifted = circular_shift(&p, &[0, 1], 5).unwrap();
        let e2 = Embedder::new(&shifted, &spec, 3).unwrap();
        for lag in 0..=3 {
            assert_eq!(e.source_rows(lag, 5).unwrap(), e2.source_rows(lag, 0).unwrap());
        }
        assert_eq!(e.target_rows(), e2.target_rows());
    }

    #[test]
    fn residualize_examples() {
        let rows = DMatrix::from_fn(30, 2, |i, j| ((i * (j + 3)) % 7) as f64 - 1.5 * j as f64);
        let r = residualize(&rows, &rows).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));

        // zero-mean rows orthogonal to a centered conditioning column
        let n = 40;
        let x = DMatrix::from_fn(n, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let w = DMatrix::from_fn(n, 1, |i, _| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 });
        assert_abs_diff_eq!(x.tr_mul(&w)[(0, 0)], 0.0);
        let r = residualize(&x, &w).unwrap();
        assert!((&r - &x).norm() < 1e-10);

        let w30 = w.rows(0, 30).into_owned();
        let once = residualize(&rows, &w30).unwrap();
        let twice = residualize(&once, &w30).unwrap();
        assert!((&once - &twice).norm() < 1e-10);
    }

    #[test]
    fn residualize_shape_mismatch() {
        let a = DMatrix::<f64>::zeros(4, 1);
        let b = DMatrix::<f64>::zeros(5, 1);
        assert!(matches!(residualize(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn deformation_set_sorts_and_validates() {
        let d = DeformationSet::new(vec![3, 1, 2], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d.lags(), &[1, 2, 3]);
        assert_eq!(d.weights(), &[2.0, 3.0, 1.0]);
        assert!(DeformationSet::uniform(Vec::<usize>::new()).is_err());
        assert!(DeformationSet::uniform([1, 1]).is_err());
        assert!(DeformationSet::new(vec![1], vec![0.0]).is_err());
    }
}
