//! Monte Carlo harness.
//!
//! Replicate `r` generates its panel with seed `derive_seed(dgp.seed, r)` and
//! draws its shift offsets from `derive_seed(panel seed, 1)`. One
//! randomization per replicate serves every configured summary, so all
//! summaries of a cell are evaluated on the same draws and shifts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{generate, DgpSpec};
use super::granger::granger_f_test;
use crate::embedding::{DeformationSet, EmbeddingSpec, FeatureMap};
use crate::error::{Error, Result};
use crate::inference::{derive_seed, randomize, upper_p, RandomizationPlan, ShiftSampler};
use crate::operators::{FamilyBuilder, OperatorFamily, OperatorKind, DEFAULT_RIDGE};
use crate::spectral::{dispersion_from_spectra, dispersion_measure, SpectralSummary};

const SHIFT_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source_depth: usize,
    pub target_depth: usize,
    pub lags: DeformationSet,
    #[serde(default)]
    pub source_map: FeatureMap,
    #[serde(default)]
    pub kind: OperatorKind,
    pub ridge: f64,
    pub num_shifts: usize,
    #[serde(default)]
    pub sampler: ShiftSampler,
    pub summaries: Vec<SpectralSummary>,
    /// Also test the spectral-measure dispersion.
    #[serde(default)]
    pub include_measure: bool,
    /// Residualize on the exposed confounder column, when the DGP has one.
    #[serde(default)]
    pub condition_on_confounder: bool,
    #[serde(default = "one")]
    pub conditioning_depth: usize,
    /// Run the pairwise Granger F-test (first source, first target) on the same draws.
    #[serde(default)]
    pub granger_order: Option<usize>,
}

fn one() -> usize {
    1
}

impl Default for PipelineConfig {
    /// Lags 1..=5, depths 5, 100 shifts, trace/Frobenius/log-det on directed
    /// coherence Grams.
    fn default() -> Self {
        Self {
            source_depth: 5,
            target_depth: 5,
            lags: DeformationSet::uniform(1..=5).expect("static lag set"),
            source_map: FeatureMap::Identity,
            kind: OperatorKind::DirectedCoherenceGram,
            ridge: DEFAULT_RIDGE,
            num_shifts: 100,
            sampler: ShiftSampler::default(),
            summaries: vec![SpectralSummary::Trace, SpectralSummary::Frobenius, SpectralSummary::log_det()],
            include_measure: false,
            condition_on_confounder: false,
            conditioning_depth: 1,
            granger_order: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_shifts == 0 {
            return Err(Error::config("num_shifts must be at least 1"));
        }
        if self.summaries.is_empty() && !self.include_measure && self.granger_order.is_none() {
            return Err(Error::config("pipeline has nothing to test"));
        }
        for s in &self.summaries {
            s.validate()?;
        }
        self.source_map.validate()
    }

    /// Names of the tested methods, in result order.
    pub fn method_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.summaries.iter().map(SpectralSummary::name).collect();
        if self.include_measure {
            names.push("wasserstein".into());
        }
        if let Some(p) = self.granger_order {
            names.push(format!("granger_var{p}"));
        }
        names
    }

    fn embedding_spec(&self, dgp: &DgpSpec) -> Result<EmbeddingSpec> {
        let roles = dgp.roles();
        let mut spec = EmbeddingSpec::linear(roles.source, roles.target, self.source_depth, self.target_depth)
            .with_source_map(self.source_map.clone());
        if self.condition_on_confounder {
            let c = roles
                .confounder
                .ok_or_else(|| Error::config("conditioning requested but the DGP exposes no confounder"))?;
            spec = spec.with_conditioning(vec![c], self.conditioning_depth);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub method: String,
    pub rejection_rate: f64,
    /// `sqrt(r (1 − r) / reps)`.
    pub std_error: f64,
    pub p_values: Vec<f64>,
}

/// Monte Carlo averages of edge diagnostics on the observed (unshifted) families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDiagnostics {
    pub mean_max_lambda1: f64,
    /// `None` for stacked operators, which carry no coherence.
    pub mean_max_kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub dgp: DgpSpec,
    pub pipeline: PipelineConfig,
    pub reps: usize,
    pub alpha: f64,
    pub cells: Vec<McCell>,
    pub diagnostics: EdgeDiagnostics,
}

impl McResult {
    pub fn cell(&self, method: &str) -> Option<&McCell> {
        self.cells.iter().find(|c| c.method == method)
    }

    pub fn rejection_rate(&self, method: &str) -> Option<f64> {
        self.cell(method).map(|c| c.rejection_rate)
    }
}

/// Per-lag clipped spectra of a family.
fn spectra(fam: &OperatorFamily) -> Vec<Vec<f64>> {
    fam.per_lag.iter().map(|op| op.eigenvalues.clone()).collect()
}

struct RepOutcome {
    p_values: Vec<f64>,
    max_lambda1: f64,
    max_kappa: Option<f64>,
}

fn statistics(fam: &OperatorFamily, pipeline: &PipelineConfig) -> Result<Vec<f64>> {
    let sp = spectra(fam);
    let mut out: Vec<f64> = pipeline.summaries.iter().map(|&f| dispersion_from_spectra(&sp, f)).collect();
    if pipeline.include_measure {
        out.push(dispersion_measure(fam)?.statistic);
    }
    Ok(out)
}

fn run_rep(dgp: &DgpSpec, pipeline: &PipelineConfig, spec: &EmbeddingSpec) -> Result<RepOutcome> {
    let panel = generate(dgp)?;
    let plan = RandomizationPlan {
        num_shifts: pipeline.num_shifts,
        sampler: pipeline.sampler,
        tail: Default::default(),
        seed: derive_seed(dgp.seed, SHIFT_STREAM),
    };
    let shifts = plan.shifts(panel.len(), pipeline.lags.max_lag() + pipeline.source_depth)?;
    let builder = FamilyBuilder::new(&panel, spec, &pipeline.lags, pipeline.kind, pipeline.ridge)?;

    let observed_family = builder.build(0)?;
    let max_lambda1 = observed_family.per_lag.iter().map(|op| op.eigenvalues[0]).fold(0.0, f64::max);
    let max_kappa = match pipeline.kind {
        OperatorKind::DirectedCoherenceGram => Some(observed_family.coherences().map(|c| c.kappa()).fold(0.0, f64::max)),
        OperatorKind::StackedCovariance => None,
    };
    let observed = statistics(&observed_family, pipeline)?;
    let (_, replicates) = randomize(&builder, &shifts, |fam| statistics(fam, pipeline))?;

    let mut p_values: Vec<f64> = (0..observed.len())
        .map(|s| {
            let null: Vec<f64> = replicates.iter().map(|r| r[s]).collect();
            upper_p(observed[s], &null)
        })
        .collect();
    if let Some(order) = pipeline.granger_order {
        p_values.push(granger_f_test(&panel, spec.source_indices[0], spec.target_indices[0], order)?);
    }
    Ok(RepOutcome { p_values, max_lambda1, max_kappa })
}

/// Runs `reps` seeded replicates of `dgp` through `pipeline` and reports
/// rejection rates at level `alpha` (reject when `p ≤ alpha`).
pub fn run_mc(dgp: &DgpSpec, pipeline: &PipelineConfig, reps: usize, alpha: f64) -> Result<McResult> {
    if reps == 0 {
        return Err(Error::config("Monte Carlo needs at least one replicate"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config("alpha must lie in (0, 1)"));
    }
    dgp.validate()?;
    pipeline.validate()?;
    let spec = pipeline.embedding_spec(dgp)?;

    let outcomes: Vec<RepOutcome> = (0..reps)
        .into_par_iter()
        .map(|r| run_rep(&dgp.with_seed(derive_seed(dgp.seed, r as u64)), pipeline, &spec))
        .collect::<Result<_>>()?;

    let n = reps as f64;
    let cells = pipeline
        .method_names()
        .into_iter()
        .enumerate()
        .map(|(s, method)| {
            let p_values: Vec<f64> = outcomes.iter().map(|o| o.p_values[s]).collect();
            let rate = p_values.iter().filter(|&&p| p <= alpha).count() as f64 / n;
            McCell { method, rejection_rate: rate, std_error: (rate * (1.0 - rate) / n).sqrt(), p_values }
        })
        .collect();
    let diagnostics = EdgeDiagnostics {
        mean_max_lambda1: outcomes.iter().map(|o| o.max_lambda1).sum::<f64>() / n,
        mean_max_kappa: outcomes
            .iter()
            .map(|o| o.max_kappa)
            .sum::<Option<f64>>()
            .map(|s| s / n),
    };
    Ok(McResult { dgp: *dgp, pipeline: pipeline.clone(), reps, alpha, cells, diagnostics })
}
