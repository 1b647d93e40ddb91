//! Circular-shift randomization inference.
//!
//! Each replicate rotates the whole source block by one offset `k_b` and
//! recomputes the statistic; targets stay in place. The upper-tail p-value is
//! `(1 + #{T_b ≥ T_obs}) / (B + 1)`, ties counting as exceedances.
//!
//! Replicate `b` draws its offset from its own ChaCha stream (`seed`, stream
//! `b`), so results do not depend on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{DeformationSet, EmbeddingSpec};
use crate::error::{Error, Result};
use crate::operators::{FamilyBuilder, OperatorFamily, OperatorKind};
use crate::panel::TimeSeriesPanel;
use crate::spectral::{dispersion_measure, dispersion_scalar, SpectralSummary};

/// Deterministic child seed: first output of ChaCha8 stream `stream` keyed by `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.random()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftSampler {
    /// Offsets uniform on `{m, …, T − m}`; `None` uses `m = max lag + source depth`.
    UniformOffsets { min_offset: Option<usize> },
    /// `k_b = round((b + 1) · T / (B + 1))`.
    EvenlySpaced,
}

impl Default for ShiftSampler {
    fn default() -> Self {
        ShiftSampler::UniformOffsets { min_offset: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    #[default]
    Upper,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomizationPlan {
    pub num_shifts: usize,
    #[serde(default)]
    pub sampler: ShiftSampler,
    #[serde(default)]
    pub tail: Tail,
    pub seed: u64,
}

impl RandomizationPlan {
    pub fn new(num_shifts: usize, seed: u64) -> Self {
        Self { num_shifts, sampler: ShiftSampler::default(), tail: Tail::Upper, seed }
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_sampler(mut self, sampler: ShiftSampler) -> Self {
        self.sampler = sampler;
        self
    }

    /// Smallest attainable upper-tail p-value, `1 / (B + 1)`.
    pub fn min_p_value(&self) -> f64 {
        1.0 / (self.num_shifts as f64 + 1.0)
    }

    /// Offsets for a series of length `t`; `default_min` is used when the
    /// sampler leaves the minimum offset unset.
    pub fn shifts(&self, t: usize, default_min: usize) -> Result<Vec<usize>> {
        if self.num_shifts == 0 {
            return Err(Error::config("randomization needs at least one shift"));
        }
        match self.sampler {
            ShiftSampler::UniformOffsets { min_offset } => {
                let m = min_offset.unwrap_or(default_min);
                if m == 0 || m >= t.saturating_sub(m) {
                    return Err(Error::config(format!(
                        "minimum shift offset {m} incompatible with series length {t}"
                    )));
                }
                Ok((0..self.num_shifts)
                    .map(|b| {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                        rng.set_stream(b as u64);
                        rng.random_range(m..=t - m)
                    })
                    .collect())
            }
            ShiftSampler::EvenlySpaced => {
                let b1 = self.num_shifts as f64 + 1.0;
                let ks: Vec<usize> =
                    (0..self.num_shifts).map(|b| (((b as f64 + 1.0) * t as f64) / b1).round() as usize % t).collect();
                if ks.iter().any(|&k| k == 0) {
                    return Err(Error::config(format!("{} evenly spaced shifts do not fit T = {t}", self.num_shifts)));
                }
                Ok(ks)
            }
        }
    }
}

/// `(1 + #{r ≥ observed}) / (B + 1)`.
pub fn upper_p(observed: f64, replicates: &[f64]) -> f64 {
    let hits = replicates.iter().filter(|&&r| r >= observed).count();
    (1 + hits) as f64 / (replicates.len() + 1) as f64
}

/// `(1 + #{r ≤ observed}) / (B + 1)`.
pub fn lower_p(observed: f64, replicates: &[f64]) -> f64 {
    let hits = replicates.iter().filter(|&&r| r <= observed).count();
    (1 + hits) as f64 / (replicates.len() + 1) as f64
}

/// `min(1, 2 · min(p_upper, p_lower))`.
pub fn two_sided_p(observed: f64, replicates: &[f64]) -> f64 {
    (2.0 * upper_p(observed, replicates).min(lower_p(observed, replicates))).min(1.0)
}

pub fn p_value(observed: f64, replicates: &[f64], tail: Tail) -> f64 {
    match tail {
        Tail::Upper => upper_p(observed, replicates),
        Tail::TwoSided => two_sided_p(observed, replicates),
    }
}

/// Statistic of an operator family used for testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestStatistic {
    /// Scalar dispersion `T_f`.
    Dispersion { summary: SpectralSummary },
    /// Spectral-measure dispersion `T_spec` (1-Wasserstein).
    MeasureDispersion,
}

impl TestStatistic {
    pub fn evaluate(&self, family: &OperatorFamily) -> Result<f64> {
        match self {
            TestStatistic::Dispersion { summary } => Ok(dispersion_scalar(family, *summary)?.statistic),
            TestStatistic::MeasureDispersion => Ok(dispersion_measure(family)?.statistic),
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestStatistic::Dispersion { summary } => summary.name(),
            TestStatistic::MeasureDispersion => "wasserstein".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub observed: f64,
    pub replicates: Vec<f64>,
    pub p_value: f64,
    pub tail: Tail,
    pub shifts: Vec<usize>,
}

impl TestResult {
    pub fn from_parts(observed: f64, replicates: Vec<f64>, tail: Tail, shifts: Vec<usize>) -> Self {
        let p_value = p_value(observed, &replicates, tail);
        Self { observed, replicates, p_value, tail, shifts }
    }
}

/// Evaluates `stat` on the unshifted family and on every shifted replicate.
/// Replicates run in parallel and are returned in shift order.
pub fn randomize<R, F>(builder: &FamilyBuilder<'_>, shifts: &[usize], stat: F) -> Result<(R, Vec<R>)>
where
    R: Send,
    F: Fn(&OperatorFamily) -> Result<R> + Sync,
{
    let observed = stat(&builder.build(0)?)?;
    let replicates =
        shifts.par_iter().map(|&k| builder.build(k).and_then(|fam| stat(&fam))).collect::<Result<Vec<R>>>()?;
    Ok((observed, replicates))
}

/// Default minimum shift offset: largest lag plus source depth.
pub fn default_min_offset(spec: &EmbeddingSpec, deformation: &DeformationSet) -> usize {
    deformation.max_lag() + spec.source_depth
}

/// Circular-shift randomization test of a single statistic.
pub fn randomization_test(
    panel: &TimeSeriesPanel,
    spec: &EmbeddingSpec,
    deformation: &DeformationSet,
    kind: OperatorKind,
    ridge: f64,
    statistic: TestStatistic,
    plan: &RandomizationPlan,
) -> Result<TestResult> {
    if let TestStatistic::Dispersion { summary } = statistic {
        summary.validate()?;
    }
    let shifts = plan.shifts(panel.len(), default_min_offset(spec, deformation))?;
    let builder = FamilyBuilder::new(panel, spec, deformation, kind, ridge)?;
    let (observed, replicates) = randomize(&builder, &shifts, |fam| statistic.evaluate(fam))?;
    Ok(TestResult::from_parts(observed, replicates, plan.tail, shifts))
}

/// Maximal runs of consecutive indices with `p < alpha`, as closed intervals.
pub fn detect_episodes(p_values: &[f64], alpha: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &p) in p_values.iter().enumerate() {
        match (p < alpha, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, p_values.len() - 1));
    }
    out
}
