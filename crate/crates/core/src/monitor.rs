//! Rolling-window operator monitoring.
//!
//! Within each window every column acts both as a driver (lag-embedded to
//! depth `p`, lag-major layout) and as a contemporaneous target. For each lag
//! `τ` the window yields the whitened cross-covariance `A_τ` (`K × pK`), and
//! the window operator is `C(t) = Σ_τ w_τ A_τ A_τᵀ`. Window p-values come from
//! circular shifts of the driver block; the same shifts produce the null
//! replicates used to threshold driver-to-driver networks.
//!
//! Every window uses the same `B` offsets, so replicate `b` averaged over an
//! episode is one coherent rotation rather than a mix of unrelated draws,
//! and its spread is comparable to that of the observed episode average.

use std::collections::BTreeSet;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{DeformationSet, EmbeddingSpec};
use crate::error::{Error, Result};
use crate::inference::{detect_episodes, two_sided_p, upper_p, RandomizationPlan, ShiftSampler};
use crate::linalg::{sym_eig, SymMatrix};
use crate::operators::{FamilyBuilder, OperatorFamily, OperatorKind, DEFAULT_RIDGE};
use crate::panel::{TimeSeriesPanel, TimeStamp};
use crate::spectral::effective_rank;

/// Share of `tr C(t)` the default hub projector must capture.
pub const HUB_ENERGY_SHARE: f64 = 0.8;
/// Upper bound on the default hub projector rank.
pub const HUB_RANK_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub window: usize,
    pub step: usize,
    /// Driver embedding depth `p`.
    pub depth: usize,
    pub lags: DeformationSet,
    pub ridge: f64,
    pub num_shifts: usize,
    #[serde(default)]
    pub sampler: ShiftSampler,
    /// Episode threshold on the `λ₁` p-value.
    pub alpha: f64,
    /// Entry-wise level of the null-thresholded networks.
    pub network_alpha: f64,
    pub top_k_hubs: usize,
    /// Fixed hub projector rank; `None` picks the smallest rank capturing
    /// 80% of the trace, capped at 10.
    #[serde(default)]
    pub hub_rank: Option<usize>,
    pub early_lags: Vec<usize>,
    pub late_lags: Vec<usize>,
    pub seed: u64,
}

impl MonitorConfig {
    /// `W = 252`, step 21, `p = 3`, lags {1, 2, 3, 5}, ridge 1e-8, `B = 20`,
    /// α = 0.05, top-20 hubs, early {1, 2} / late {3, 5}.
    pub fn empirical() -> Self {
        Self {
            window: 252,
            step: 21,
            depth: 3,
            lags: DeformationSet::uniform([1, 2, 3, 5]).expect("static lag set"),
            ridge: DEFAULT_RIDGE,
            num_shifts: 20,
            sampler: ShiftSampler::default(),
            alpha: 0.05,
            network_alpha: 0.05,
            top_k_hubs: 20,
            hub_rank: None,
            early_lags: vec![1, 2],
            late_lags: vec![3, 5],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::config("embedding depth must be at least 1"));
        }
        if self.window <= self.depth + self.lags.max_lag() {
            return Err(Error::config(format!(
                "window {} must exceed depth + max lag = {}",
                self.window,
                self.depth + self.lags.max_lag()
            )));
        }
        if self.step == 0 {
            return Err(Error::config("step must be at least 1"));
        }
        if self.num_shifts == 0 {
            return Err(Error::config("monitoring needs at least one shift per window"));
        }
        for (name, a) in [("alpha", self.alpha), ("network_alpha", self.network_alpha)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1]")));
            }
        }
        if self.top_k_hubs == 0 {
            return Err(Error::config("top_k_hubs must be positive"));
        }
        if self.hub_rank == Some(0) {
            return Err(Error::config("hub rank must be positive"));
        }
        let early: BTreeSet<usize> = self.early_lags.iter().copied().collect();
        let late: BTreeSet<usize> = self.late_lags.iter().copied().collect();
        let all: BTreeSet<usize> = self.lags.lags().iter().copied().collect();
        if !early.is_disjoint(&late) || early.union(&late).copied().collect::<BTreeSet<_>>() != all {
            return Err(Error::config("early and late lag sets must partition the lag set"));
        }
        Ok(())
    }

    /// Number of windows for a panel of length `t`.
    pub fn num_windows(&self, t: usize) -> usize {
        if t < self.window {
            0
        } else {
            (t - self.window) / self.step + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HubSide {
    Target,
    Source,
}

/// Statistics of one rolling window. Matrices and hub vectors are indexed
/// by panel column.
#[derive(Debug, Clone, Serialize)]
pub struct WindowStats {
    pub index: usize,
    pub window_start: TimeStamp,
    pub window_end: TimeStamp,
    pub lambda1: f64,
    pub trace: f64,
    pub eff_rank: f64,
    pub p_lambda1: f64,
    pub p_trace: f64,
    pub p_effrank: f64,
    /// `(τ, ‖A_τ‖_F²)`.
    pub lag_energy: Vec<(usize, f64)>,
    pub tau_com: Option<f64>,
    pub dominance: Option<f64>,
    pub hub_rank: usize,
    pub hub_target: Vec<f64>,
    pub hub_source: Vec<f64>,
    #[serde(skip)]
    pub driver_matrix: DMatrix<f64>,
    #[serde(skip)]
    pub driver_matrix_per_lag: Vec<DMatrix<f64>>,
    /// Driver matrices of the shift replicates, in shift order.
    #[serde(skip)]
    pub null_driver_matrices: Vec<DMatrix<f64>>,
    pub warnings: Vec<String>,
}

/// Contiguous run of significant windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub first_window: usize,
    pub last_window: usize,
    pub start: TimeStamp,
    pub end: TimeStamp,
}

/// Episode-averaged driver matrix with entry-wise null p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMap {
    /// Mean of `M_{j,i}` over the episode windows (row = target, column = driver).
    pub mean: DMatrix<f64>,
    /// `(1 + #{null_b ≥ observed}) / (B + 1)` per entry.
    pub p_values: DMatrix<f64>,
    pub alpha: f64,
}

impl NetworkMap {
    pub fn retained(&self, target: usize, driver: usize) -> bool {
        self.p_values[(target, driver)] <= self.alpha
    }

    /// Mean values where retained, `None` where masked.
    pub fn masked(&self) -> DMatrix<Option<f64>> {
        DMatrix::from_fn(self.mean.nrows(), self.mean.ncols(), |j, i| {
            self.retained(j, i).then(|| self.mean[(j, i)])
        })
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeNetwork {
    pub episode: Episode,
    pub network: NetworkMap,
    /// Per-edge `(late − early) / total` energy share, 0 where no energy.
    pub dominance_map: DMatrix<f64>,
}

/// User-supplied group of drivers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroHubIndices {
    pub clusters: Vec<String>,
    /// `series[c][w]`: summed target hub score of cluster `c` in window `w`.
    pub series: Vec<Vec<f64>>,
    /// Arg-max cluster per window (first on ties).
    pub dominant: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RollingReport {
    pub labels: Vec<String>,
    pub config: MonitorConfig,
    pub windows: Vec<WindowStats>,
    pub episodes: Vec<Episode>,
    /// `1 − Jaccard` between consecutive top-k target hub sets.
    pub turnover: Vec<f64>,
    pub episode_networks: Vec<EpisodeNetwork>,
    pub macro_hubs: Option<MacroHubIndices>,
}

/// `Σ τ E_τ / Σ E_τ`; `None` when all energies vanish.
pub fn lag_center_of_mass(energy: &[(usize, f64)]) -> Option<f64> {
    let total: f64 = energy.iter().map(|e| e.1).sum();
    (total > 0.0).then(|| energy.iter().map(|&(t, e)| t as f64 * e).sum::<f64>() / total)
}

/// `(Σ_late E_τ − Σ_early E_τ) / Σ E_τ`; `None` when all energies vanish.
pub fn signed_dominance(energy: &[(usize, f64)], early_lags: &[usize], late_lags: &[usize]) -> Option<f64> {
    let total: f64 = energy.iter().map(|e| e.1).sum();
    if total <= 0.0 {
        return None;
    }
    let sum_in = |set: &[usize]| energy.iter().filter(|e| set.contains(&e.0)).map(|e| e.1).sum::<f64>();
    Some((sum_in(late_lags) - sum_in(early_lags)) / total)
}

/// `M_{j,i} = Σ_τ Σ_ℓ (A_τ)_{j,(ℓ-1)K+i}²`.
pub fn driver_matrix(a_per_lag: &[&DMatrix<f64>], depth: usize, k: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(k, k);
    for a in a_per_lag {
        if a.nrows() != k || a.ncols() != depth * k {
            return Err(Error::dim(format!(
                "coherence is {}x{}, expected {k}x{}",
                a.nrows(),
                a.ncols(),
                depth * k
            )));
        }
        for l in 0..depth {
            for i in 0..k {
                for j in 0..k {
                    let v = a[(j, l * k + i)];
                    m[(j, i)] += v * v;
                }
            }
        }
    }
    Ok(m)
}

/// Smallest `m` with `Σ_{j≤m} λ_j ≥ share · Σ λ`, capped at `cap`.
pub fn default_hub_rank(eigenvalues: &[f64], share: f64, cap: usize) -> usize {
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return 1;
    }
    let mut acc = 0.0;
    for (j, l) in eigenvalues.iter().enumerate() {
        acc += l.max(0.0);
        if acc >= share * total {
            return (j + 1).min(cap).max(1);
        }
    }
    eigenvalues.len().min(cap).max(1)
}

/// Diagonal of the rank-`m` top eigenprojector.
///
/// Target side: projector of `c_agg` (dimension `K`). Source side: projector
/// of `Σ_τ A_τᵀ A_τ` (dimension `pK`), folded onto drivers by summing over
/// embedding positions.
pub fn hub_scores(
    c_agg: &SymMatrix,
    m: usize,
    side: HubSide,
    a_per_lag: &[&DMatrix<f64>],
    depth: usize,
) -> Result<Vec<f64>> {
    let projector_diag = |mat: &SymMatrix| -> Result<Vec<f64>> {
        if m == 0 || m > mat.dim() {
            return Err(Error::config(format!("hub rank {m} outside 1..={}", mat.dim())));
        }
        let es = sym_eig(mat);
        let vm = es.eigenvectors.columns(0, m);
        Ok((0..mat.dim()).map(|i| vm.row(i).norm_squared()).collect())
    };
    match side {
        HubSide::Target => projector_diag(c_agg),
        HubSide::Source => {
            let first = a_per_lag.first().ok_or_else(|| Error::config("source hub scores need coherences"))?;
            let cols = first.ncols();
            if depth == 0 || cols % depth != 0 {
                return Err(Error::dim(format!("{cols} source coordinates not divisible by depth {depth}")));
            }
            let mut g = DMatrix::zeros(cols, cols);
            for a in a_per_lag {
                if a.ncols() != cols {
                    return Err(Error::dim("coherences disagree on source dimension"));
                }
                g += a.tr_mul(a);
            }
            let diag = projector_diag(&SymMatrix::new(g)?)?;
            let k = cols / depth;
            Ok((0..k).map(|i| (0..depth).map(|l| diag[l * k + i]).sum()).collect())
        }
    }
}

/// Indices of the `k` largest scores (lower index wins ties).
pub fn top_k(scores: &[f64], k: usize) -> BTreeSet<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.into_iter().take(k).collect()
}

/// `1 − |S_t ∩ S_{t+1}| / |S_t ∪ S_{t+1}|` for consecutive sets.
pub fn turnover(top_sets: &[BTreeSet<usize>]) -> Vec<f64> {
    top_sets
        .windows(2)
        .map(|w| {
            let inter = w[0].intersection(&w[1]).count() as f64;
            let union = w[0].union(&w[1]).count() as f64;
            if union == 0.0 {
                0.0
            } else {
                1.0 - inter / union
            }
        })
        .collect()
}

/// Episode-averaged driver matrix, keeping entries whose add-one null p-value
/// is at most `alpha` (the observed mean exceeds the null's upper quantile).
///
/// `observed[w]` and `null_replicates[w][b]` are the driver matrices of
/// window `w`; replicate `b` of the episode average is the mean of replicate
/// `b` over the episode windows.
pub fn null_threshold_network(
    episode_windows: &[usize],
    observed: &[DMatrix<f64>],
    null_replicates: &[Vec<DMatrix<f64>>],
    alpha: f64,
) -> Result<NetworkMap> {
    let first = *episode_windows.first().ok_or_else(|| Error::config("episode has no windows"))?;
    let (rows, cols) = observed[first].shape();
    let b = null_replicates[first].len();
    if b == 0 {
        return Err(Error::config("network thresholding needs null replicates"));
    }
    let n = episode_windows.len() as f64;
    let mut mean = DMatrix::zeros(rows, cols);
    let mut nulls = vec![DMatrix::zeros(rows, cols); b];
    for &w in episode_windows {
        if null_replicates[w].len() != b {
            return Err(Error::dim("windows carry different numbers of null replicates"));
        }
        mean += &observed[w] / n;
        for (acc, rep) in nulls.iter_mut().zip(&null_replicates[w]) {
            *acc += rep / n;
        }
    }
    let p_values = DMatrix::from_fn(rows, cols, |j, i| {
        let hits = nulls.iter().filter(|m| m[(j, i)] >= mean[(j, i)]).count();
        (1 + hits) as f64 / (b + 1) as f64
    });
    Ok(NetworkMap { mean, p_values, alpha })
}

/// Per-edge signed early/late dominance from per-lag driver matrices.
pub fn dominance_map(per_lag: &[(usize, DMatrix<f64>)], early_lags: &[usize], late_lags: &[usize]) -> DMatrix<f64> {
    let (rows, cols) = per_lag[0].1.shape();
    DMatrix::from_fn(rows, cols, |j, i| {
        let energy: Vec<(usize, f64)> = per_lag.iter().map(|(t, m)| (*t, m[(j, i)])).collect();
        signed_dominance(&energy, early_lags, late_lags).unwrap_or(0.0)
    })
}

/// Per-cluster sums of target hub scores. `hub_series[w][i]` is driver `i`'s
/// score in window `w`.
pub fn macro_hub_indices(hub_series: &[Vec<f64>], labels: &[String], clusters: &[Cluster]) -> Result<MacroHubIndices> {
    if clusters.is_empty() {
        return Err(Error::config("no clusters supplied"));
    }
    let mut seen = BTreeSet::new();
    let mut member_idx = Vec::with_capacity(clusters.len());
    for c in clusters {
        let mut idx = Vec::with_capacity(c.members.len());
        for m in &c.members {
            let i = labels
                .iter()
                .position(|l| l == m)
                .ok_or_else(|| Error::config(format!("cluster {} names unknown driver {m}", c.name)))?;
            if !seen.insert(i) {
                return Err(Error::config(format!("driver {m} assigned to more than one cluster")));
            }
            idx.push(i);
        }
        member_idx.push(idx);
    }
    let series: Vec<Vec<f64>> =
        member_idx.iter().map(|idx| hub_series.iter().map(|h| idx.iter().map(|&i| h[i]).sum()).collect()).collect();
    let dominant = (0..hub_series.len())
        .map(|w| {
            let mut best = 0;
            for c in 1..clusters.len() {
                if series[c][w] > series[best][w] {
                    best = c;
                }
            }
            clusters[best].name.clone()
        })
        .collect();
    Ok(MacroHubIndices { clusters: clusters.iter().map(|c| c.name.clone()).collect(), series, dominant })
}

struct ReplicateSummary {
    lambda1: f64,
    trace: f64,
    eff_rank: f64,
    driver_matrix: DMatrix<f64>,
}

fn coherence_matrices(fam: &OperatorFamily) -> Vec<&DMatrix<f64>> {
    fam.coherences().map(|c| &c.matrix).collect()
}

fn summarize(fam: &OperatorFamily, depth: usize, k: usize) -> Result<ReplicateSummary> {
    let ev = fam.aggregate.eigenvalues();
    Ok(ReplicateSummary {
        lambda1: ev.first().copied().unwrap_or(0.0).max(0.0),
        trace: fam.aggregate.trace(),
        eff_rank: effective_rank(&ev),
        driver_matrix: driver_matrix(&coherence_matrices(fam), depth, k)?,
    })
}

/// Embeds an active-column matrix back into full `K × K` panel coordinates.
fn scatter(m: &DMatrix<f64>, active: &[usize], k: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(k, k);
    for (a, &j) in active.iter().enumerate() {
        for (b, &i) in active.iter().enumerate() {
            out[(j, i)] = m[(a, b)];
        }
    }
    out
}

fn scatter_vec(v: &[f64], active: &[usize], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    for (a, &i) in active.iter().enumerate() {
        out[i] = v[a];
    }
    out
}

fn analyze_window(panel: &TimeSeriesPanel, config: &MonitorConfig, index: usize) -> Result<WindowStats> {
    let start = index * config.step;
    let window = panel.slice_rows(start, start + config.window)?;
    let k = panel.num_series();
    let mut warnings = Vec::new();

    let active: Vec<usize> = (0..k)
        .filter(|&c| {
            let col = window.column(c);
            col.iter().any(|&v| v != col[0])
        })
        .collect();
    if active.len() < k {
        let dropped: Vec<&str> =
            (0..k).filter(|c| !active.contains(c)).map(|c| panel.labels()[c].as_str()).collect();
        let msg = format!("window {index}: constant columns dropped: {}", dropped.join(", "));
        warn!("{msg}");
        warnings.push(msg);
    }
    if active.is_empty() {
        return Err(Error::Numerical(format!("window {index} has no varying columns")));
    }
    let ka = active.len();

    let spec = EmbeddingSpec::linear(active.clone(), active.clone(), config.depth, 0).allowing_overlap();
    let builder = FamilyBuilder::new(&window, &spec, &config.lags, OperatorKind::DirectedCoherenceGram, config.ridge)?;
    let plan = RandomizationPlan {
        num_shifts: config.num_shifts,
        sampler: config.sampler,
        tail: Default::default(),
        seed: config.seed,
    };
    let shifts = plan.shifts(config.window, config.lags.max_lag() + config.depth)?;

    let observed = builder.build(0)?;
    let replicates: Vec<ReplicateSummary> = shifts
        .par_iter()
        .map(|&s| builder.build(s).and_then(|fam| summarize(&fam, config.depth, ka)))
        .collect::<Result<_>>()?;

    let es = sym_eig(&observed.aggregate);
    let ev: Vec<f64> = es.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let lambda1 = ev.first().copied().unwrap_or(0.0);
    let trace = observed.aggregate.trace();
    let eff_rank = effective_rank(&ev);

    let null = |f: fn(&ReplicateSummary) -> f64| replicates.iter().map(f).collect::<Vec<f64>>();
    let p_lambda1 = upper_p(lambda1, &null(|r| r.lambda1));
    let p_trace = upper_p(trace, &null(|r| r.trace));
    let p_effrank = two_sided_p(eff_rank, &null(|r| r.eff_rank));

    let coh = coherence_matrices(&observed);
    let lag_energy: Vec<(usize, f64)> = observed.per_lag.iter().map(|op| (op.lag, op.coherence.as_ref().map_or(0.0, |c| c.energy()))).collect();
    let per_lag: Vec<DMatrix<f64>> = coh
        .iter()
        .map(|a| driver_matrix(&[*a], config.depth, ka).map(|m| scatter(&m, &active, k)))
        .collect::<Result<_>>()?;
    let total = driver_matrix(&coh, config.depth, ka)?;

    let hub_rank = config.hub_rank.unwrap_or_else(|| default_hub_rank(&ev, HUB_ENERGY_SHARE, HUB_RANK_CAP)).min(ka);
    let hub_target = hub_scores(&observed.aggregate, hub_rank, HubSide::Target, &coh, config.depth)?;
    let hub_source = hub_scores(&observed.aggregate, hub_rank, HubSide::Source, &coh, config.depth)?;

    Ok(WindowStats {
        index,
        window_start: window.times()[0],
        window_end: *window.times().last().expect("nonempty window"),
        lambda1,
        trace,
        eff_rank,
        p_lambda1,
        p_trace,
        p_effrank,
        tau_com: lag_center_of_mass(&lag_energy),
        dominance: signed_dominance(&lag_energy, &config.early_lags, &config.late_lags),
        lag_energy,
        hub_rank,
        hub_target: scatter_vec(&hub_target, &active, k),
        hub_source: scatter_vec(&hub_source, &active, k),
        driver_matrix: scatter(&total, &active, k),
        driver_matrix_per_lag: per_lag,
        null_driver_matrices: replicates.into_iter().map(|r| scatter(&r.driver_matrix, &active, k)).collect(),
        warnings,
    })
}

/// Runs the rolling monitor over every window of the panel.
pub fn run_monitor(panel: &TimeSeriesPanel, config: &MonitorConfig, clusters: Option<&[Cluster]>) -> Result<RollingReport> {
    config.validate()?;
    let n = config.num_windows(panel.len());
    if n == 0 {
        return Err(Error::config(format!("panel length {} shorter than window {}", panel.len(), config.window)));
    }
    let windows: Vec<WindowStats> =
        (0..n).into_par_iter().map(|w| analyze_window(panel, config, w)).collect::<Result<_>>()?;

    let p: Vec<f64> = windows.iter().map(|w| w.p_lambda1).collect();
    let episodes: Vec<Episode> = detect_episodes(&p, config.alpha)
        .into_iter()
        .map(|(a, b)| Episode {
            first_window: a,
            last_window: b,
            start: windows[a].window_end,
            end: windows[b].window_end,
        })
        .collect();

    let k = panel.num_series();
    let top_sets: Vec<BTreeSet<usize>> =
        windows.iter().map(|w| top_k(&w.hub_target, config.top_k_hubs.min(k))).collect();

    let observed: Vec<DMatrix<f64>> = windows.iter().map(|w| w.driver_matrix.clone()).collect();
    let nulls: Vec<Vec<DMatrix<f64>>> = windows.iter().map(|w| w.null_driver_matrices.clone()).collect();
    let mut episode_networks = Vec::with_capacity(episodes.len());
    for ep in &episodes {
        let idx: Vec<usize> = (ep.first_window..=ep.last_window).collect();
        let network = null_threshold_network(&idx, &observed, &nulls, config.network_alpha)?;
        let per_lag: Vec<(usize, DMatrix<f64>)> = config
            .lags
            .lags()
            .iter()
            .enumerate()
            .map(|(li, &tau)| {
                let mean = idx.iter().fold(DMatrix::zeros(k, k), |acc, &w| acc + &windows[w].driver_matrix_per_lag[li]);
                (tau, mean / idx.len() as f64)
            })
            .collect();
        let dominance_map = dominance_map(&per_lag, &config.early_lags, &config.late_lags);
        episode_networks.push(EpisodeNetwork { episode: ep.clone(), network, dominance_map });
    }

    let macro_hubs = match clusters {
        Some(c) => {
            let series: Vec<Vec<f64>> = windows.iter().map(|w| w.hub_target.clone()).collect();
            Some(macro_hub_indices(&series, panel.labels(), c)?)
        }
        None => None,
    };

    Ok(RollingReport {
        labels: panel.labels().to_vec(),
        config: config.clone(),
        turnover: turnover(&top_sets),
        windows,
        episodes,
        episode_networks,
        macro_hubs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn center_of_mass_examples() {
        let eq: Vec<(usize, f64)> = [1, 2, 3, 5].iter().map(|&t| (t, 1.0)).collect();
        assert_abs_diff_eq!(lag_center_of_mass(&eq).unwrap(), 2.75);
        assert_eq!(lag_center_of_mass(&[(1, 0.0), (5, 2.0)]), Some(5.0));
        assert_eq!(lag_center_of_mass(&[(1, 3.0), (5, 1.0)]), Some(2.0));
        assert_eq!(lag_center_of_mass(&[(1, 0.0), (2, 0.0)]), None);
    }

    #[test]
    fn dominance_examples() {
        let early = [1, 2];
        let late = [3, 5];
        assert_eq!(signed_dominance(&[(1, 1.0), (2, 2.0), (3, 0.0), (5, 0.0)], &early, &late), Some(-1.0));
        assert_eq!(signed_dominance(&[(1, 0.0), (2, 0.0), (3, 1.0), (5, 1.0)], &early, &late), Some(1.0));
        assert_eq!(signed_dominance(&[(1, 1.0), (2, 1.0), (3, 1.5), (5, 0.5)], &early, &late), Some(0.0));
        assert_eq!(signed_dominance(&[(1, 0.0)], &early, &late), None);
    }

    #[test]
    fn driver_matrix_examples() {
        let (p, k) = (2, 3);
        let zero = DMatrix::zeros(k, p * k);
        assert_eq!(driver_matrix(&[&zero], p, k).unwrap(), DMatrix::zeros(k, k));

        let mut a = DMatrix::zeros(k, p * k);
        // target j = 2, embedding position ℓ = 2, driver i = 1
        a[(2, k + 1)] = 0.3;
        let m = driver_matrix(&[&a, &zero], p, k).unwrap();
        let mut expect = DMatrix::zeros(k, k);
        expect[(2, 1)] = 0.09;
        assert!((m - expect).norm() < 1e-15);

        let bad = DMatrix::zeros(k, k);
        assert!(matches!(driver_matrix(&[&bad], p, k), Err(Error::Dimension(_))));
    }

    #[test]
    fn hub_scores_rank_one() {
        let mut c = DMatrix::zeros(5, 5);
        c[(3, 3)] = 2.0;
        let c = SymMatrix::new(c).unwrap();
        let h = hub_scores(&c, 1, HubSide::Target, &[], 1).unwrap();
        for (i, v) in h.iter().enumerate() {
            assert_abs_diff_eq!(*v, if i == 3 { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }
        assert!(hub_scores(&c, 6, HubSide::Target, &[], 1).is_err());
        assert!(hub_scores(&c, 0, HubSide::Target, &[], 1).is_err());
    }

    #[test]
    fn turnover_examples() {
        let s = |v: &[usize]| v.iter().copied().collect::<BTreeSet<usize>>();
        assert_eq!(turnover(&[s(&[1, 2]), s(&[1, 2])]), vec![0.0]);
        assert_eq!(turnover(&[s(&[1, 2]), s(&[3, 4])]), vec![1.0]);
        let t = turnover(&[s(&[0, 1, 2, 3]), s(&[0, 1, 2, 4])]);
        assert_abs_diff_eq!(t[0], 0.4, epsilon = 1e-15);
    }

    #[test]
    fn top_k_breaks_ties_by_index() {
        let set = top_k(&[0.5, 0.9, 0.5, 0.1], 2);
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn network_alpha_one_keeps_everything() {
        let obs = vec![DMatrix::from_element(2, 2, 0.1)];
        let nulls = vec![vec![DMatrix::from_element(2, 2, 5.0); 10]];
        let net = null_threshold_network(&[0], &obs, &nulls, 1.0).unwrap();
        assert!((0..2).all(|j| (0..2).all(|i| net.retained(j, i))));
    }

    #[test]
    fn network_masks_null_like_entries() {
        let obs = vec![DMatrix::from_element(2, 2, 1.0)];
        let nulls =
            vec![(0..20).map(|b| DMatrix::from_element(2, 2, 1.0 + if b % 2 == 0 { 1e-3 } else { -1e-3 })).collect()];
        let net = null_threshold_network(&[0], &obs, &nulls, 0.05).unwrap();
        assert!(net.masked().iter().all(Option::is_none));
    }

    #[test]
    fn macro_hub_examples() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let hubs = vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.1, 0.8]];
        let all = Cluster { name: "all".into(), members: labels.clone() };
        let empty = Cluster { name: "none".into(), members: vec![] };
        let out = macro_hub_indices(&hubs, &labels, &[all, empty]).unwrap();
        assert_abs_diff_eq!(out.series[0][0], 1.0, epsilon = 1e-15);
        assert_eq!(out.series[1], vec![0.0, 0.0]);
        assert_eq!(out.dominant, vec!["all".to_string(), "all".to_string()]);

        let bad = Cluster { name: "x".into(), members: vec!["zz".into()] };
        assert!(matches!(macro_hub_indices(&hubs, &labels, &[bad]), Err(Error::Config(_))));
    }

    #[test]
    fn config_validation() {
        let mut c = MonitorConfig::empirical();
        assert!(c.validate().is_ok());
        c.late_lags = vec![5];
        assert!(c.validate().is_err());
        let mut c = MonitorConfig::empirical();
        c.window = 8;
        assert!(c.validate().is_err());
        assert_eq!(MonitorConfig::empirical().num_windows(1744), (1744 - 252) / 21 + 1);
    }
}
