//! Named experiment settings.
//!
//! Defaults shared by every preset: AR(1) columns with `ρ = 0.3`, signal at
//! `τ* = 2`, lags 1..=5, 200 replicates, 100 shifts, `α = 0.05`. Pairwise
//! experiments use depth 5 on both sides. Multivariate experiments use
//! contemporaneous targets (depth 1) and depth-5 sources, except the rank
//! experiment, which uses depth 1 on both sides to keep `K = 32` tractable.

use serde::{Deserialize, Serialize};

use super::dgp::{DgpKind, DgpSpec};
use super::harness::{run_mc, McResult, PipelineConfig};
use crate::embedding::FeatureMap;
use crate::error::Result;
use crate::spectral::SpectralSummary;

pub const DEFAULT_REPS: usize = 200;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Sample size of every preset except the size table.
pub const DEFAULT_T: usize = 500;

/// Strength of the quadratic alternative.
pub const NONLINEAR_STRENGTH: f64 = 0.1;
/// Sample size of the confounding experiment.
pub const CONFOUNDING_T: usize = 1000;
/// Strength grid shared by the power-curve presets.
pub const STRENGTH_GRID: [f64; 4] = [0.005, 0.01, 0.02, 0.04];
/// Total signal energy of the rank-transition experiment.
pub const RANK_ENERGY: f64 = 0.2;
pub const RANK_GRID: [usize; 4] = [1, 4, 8, 16];
pub const RANK_K: usize = 32;
pub const BULK_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub dgp: DgpSpec,
    pub pipeline: PipelineConfig,
    pub reps: usize,
    pub alpha: f64,
}

impl Experiment {
    fn new(name: impl Into<String>, dgp: DgpSpec, pipeline: PipelineConfig) -> Self {
        Self { name: name.into(), dgp, pipeline, reps: DEFAULT_REPS, alpha: DEFAULT_ALPHA }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.dgp.seed = seed;
        self
    }

    pub fn run(&self) -> Result<McResult> {
        run_mc(&self.dgp, &self.pipeline, self.reps, self.alpha)
    }
}

fn multivariate_pipeline(summaries: Vec<SpectralSummary>) -> PipelineConfig {
    PipelineConfig { target_depth: 1, summaries, ..PipelineConfig::default() }
}

fn all_summaries() -> Vec<SpectralSummary> {
    vec![SpectralSummary::Trace, SpectralSummary::Frobenius, SpectralSummary::log_det()]
}

/// Size under the null, pairwise (column 0 → column 1) with depth 5.
pub fn table1(t: usize, k: usize) -> Experiment {
    Experiment::new(format!("table1_T{t}_K{k}"), DgpSpec::new(DgpKind::Null, t, k, 0.0, 1), PipelineConfig::default())
}

/// Quadratic alternative with a degree-2 monomial source map, plus the
/// order-5 Granger baseline on the same draws.
pub fn table2() -> Experiment {
    let pipeline = PipelineConfig {
        source_map: FeatureMap::Monomials { max_degree: 2 },
        summaries: vec![SpectralSummary::Trace],
        granger_order: Some(5),
        ..PipelineConfig::default()
    };
    Experiment::new(
        "table2_nonlinear",
        DgpSpec::new(DgpKind::NonlinearQuadratic, DEFAULT_T, 2, NONLINEAR_STRENGTH, 2),
        pipeline,
    )
}

/// Latent confounding with or without residualization on the observed
/// confounder, plus the VAR(1) Granger baseline. The conditioning block
/// spans the target's embedding window, `H_t, …, H_{t−4}`.
pub fn table3(theta_direct: f64, conditional: bool) -> Experiment {
    let pipeline = PipelineConfig {
        summaries: vec![SpectralSummary::Trace],
        condition_on_confounder: conditional,
        conditioning_depth: 5,
        granger_order: Some(1),
        ..PipelineConfig::default()
    };
    let kind = DgpKind::Confounded { theta_direct, expose_confounder: true };
    let tag = if conditional { "conditional" } else { "unconditional" };
    Experiment::new(
        format!("table3_theta{theta_direct}_{tag}"),
        DgpSpec::new(kind, CONFOUNDING_T, 2, 0.0, 3),
        pipeline,
    )
}

/// Rank-one edge alternative (pairwise, depth 5).
pub fn edge(strength: f64) -> Experiment {
    Experiment::new(
        format!("edge_s{strength}"),
        DgpSpec::new(DgpKind::EdgeRankOne, DEFAULT_T, 2, strength, 4),
        PipelineConfig::default(),
    )
}

/// One source driving ⌈K/2⌉ of the `K − 1` targets.
pub fn bulk(strength: f64) -> Experiment {
    Experiment::new(
        format!("bulk_s{strength}"),
        DgpSpec::new(DgpKind::Bulk, DEFAULT_T, BULK_K, strength, 5),
        multivariate_pipeline(all_summaries()),
    )
}

/// Rank-`r` transmission from 16 sources to 16 targets at fixed total energy.
pub fn rank(r: usize) -> Experiment {
    let pipeline = PipelineConfig {
        source_depth: 1,
        target_depth: 1,
        summaries: vec![SpectralSummary::Frobenius, SpectralSummary::Trace],
        ..PipelineConfig::default()
    };
    Experiment::new(
        format!("rank_r{r}"),
        DgpSpec::new(DgpKind::RankR { rank: r }, DEFAULT_T, RANK_K, RANK_ENERGY, 6),
        pipeline,
    )
}

pub fn many_to_one(sources: usize, strength: f64) -> Experiment {
    Experiment::new(
        format!("m_to_1_M{sources}_s{strength}"),
        DgpSpec::new(DgpKind::ManyToOne { sources }, DEFAULT_T, sources + 1, strength, 7),
        multivariate_pipeline(all_summaries()),
    )
}

pub fn group_to_group(sources: usize, targets: usize, rank: usize, strength: f64) -> Experiment {
    Experiment::new(
        format!("m_to_n_M{sources}_N{targets}_r{rank}_s{strength}"),
        DgpSpec::new(DgpKind::GroupToGroup { sources, targets, rank }, DEFAULT_T, sources + targets, strength, 8),
        multivariate_pipeline(all_summaries()),
    )
}

/// Size of the randomization test with an i.i.d. source (`ρ = 0`), pairwise
/// with depth 1.
pub fn iid_null(reps: usize) -> Experiment {
    let dgp = DgpSpec { rho: 0.0, ..DgpSpec::new(DgpKind::Null, DEFAULT_T, 2, 0.0, 9) };
    let pipeline = PipelineConfig { source_depth: 1, target_depth: 1, ..PipelineConfig::default() };
    Experiment::new("iid_null", dgp, pipeline).with_reps(reps)
}

/// Every experiment of a named preset, in grid order.
pub fn by_name(name: &str) -> Option<Vec<Experiment>> {
    let out = match name {
        "table1" => vec![table1(500, 20), table1(500, 50), table1(1000, 20), table1(1000, 50)],
        "table2" => vec![table2()],
        "table3" => [0.0, 0.25]
            .iter()
            .flat_map(|&th| [false, true].map(|c| table3(th, c)))
            .collect(),
        "edge" => STRENGTH_GRID.iter().map(|&s| edge(s)).collect(),
        "bulk" => STRENGTH_GRID.iter().map(|&s| bulk(s)).collect(),
        "rank" => RANK_GRID.iter().map(|&r| rank(r)).collect(),
        "many-to-one" => STRENGTH_GRID.iter().map(|&s| many_to_one(4, s)).collect(),
        "group-to-group" => STRENGTH_GRID.iter().map(|&s| group_to_group(4, 4, 2, s)).collect(),
        _ => return None,
    };
    Some(out)
}

pub const PRESET_NAMES: [&str; 8] =
    ["table1", "table2", "table3", "edge", "bulk", "rank", "many-to-one", "group-to-group"];
