//! Data-generating processes.
//!
//! Every panel starts from independent stationary AR(1) columns with standard
//! Gaussian innovations. Alternatives add a signal to the target columns at a
//! single lag `τ*`, at the observation level, so the base columns (and hence
//! the null panel) are identical across kinds for a fixed seed.
//!
//! `strength` is the ratio of injected-signal variance to innovation variance.
//! It is per affected target for `Bulk`, and total across targets for the
//! loading-matrix kinds (`RankR`, `GroupToGroup`, `ManyToOne`).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::derive_seed;
use crate::panel::TimeSeriesPanel;

/// AR coefficient of the latent confounder.
pub const CONFOUNDER_RHO: f64 = 0.5;

const LOADING_STREAM: u64 = 1;
const CONFOUNDER_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpKind {
    Null,
    /// Column 0 drives column 1.
    EdgeRankOne,
    /// Column 0 drives columns `1..=⌈K/2⌉` with equal loadings.
    Bulk,
    /// First `⌊K/2⌋` columns drive the rest through a rank-`rank` loading.
    RankR { rank: usize },
    /// Columns `0..sources` drive column `sources`.
    ManyToOne { sources: usize },
    /// Columns `0..sources` drive `sources..sources + targets` through a rank-`rank` loading.
    GroupToGroup { sources: usize, targets: usize, rank: usize },
    /// Column 1 receives `θ (x²_{t−τ*} − E x²)` from column 0.
    NonlinearQuadratic,
    /// A latent AR(1) `H` enters columns 0 and 1 contemporaneously with unit
    /// loadings; column 1 also receives `theta_direct · x_{t−τ*}`. With
    /// `expose_confounder`, `H` is appended as the last column.
    Confounded { theta_direct: f64, expose_confounder: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub t: usize,
    pub k: usize,
    pub rho: f64,
    pub tau_star: usize,
    pub strength: f64,
    pub seed: u64,
}

/// Source, target and (optional) confounder columns of a generated panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub confounder: Option<usize>,
}

impl DgpSpec {
    /// `ρ = 0.3`, `τ* = 2`.
    pub fn new(kind: DgpKind, t: usize, k: usize, strength: f64, seed: u64) -> Self {
        Self { kind, t, k, rho: 0.3, tau_star: 2, strength, seed }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Stationary variance of a base column.
    pub fn base_variance(&self) -> f64 {
        1.0 / (1.0 - self.rho * self.rho)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::config(format!("AR coefficient must satisfy |rho| < 1, got {}", self.rho)));
        }
        if self.tau_star == 0 || self.tau_star >= self.t {
            return Err(Error::config(format!("tau_star {} outside 1..{}", self.tau_star, self.t)));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::config("strength must be finite and nonnegative"));
        }
        if self.t < 2 {
            return Err(Error::InsufficientData { needed: 2, available: self.t });
        }
        let need = match self.kind {
            DgpKind::ManyToOne { sources } => {
                if sources == 0 {
                    return Err(Error::config("ManyToOne needs at least one source"));
                }
                sources + 1
            }
            DgpKind::GroupToGroup { sources, targets, rank } => {
                if rank == 0 || rank > sources.min(targets) {
                    return Err(Error::config(format!("rank {rank} outside 1..=min({sources}, {targets})")));
                }
                sources + targets
            }
            DgpKind::RankR { rank } => {
                let (m, n) = (self.k / 2, self.k - self.k / 2);
                if rank == 0 || rank > m.min(n) {
                    return Err(Error::config(format!("rank {rank} outside 1..={}", m.min(n))));
                }
                2
            }
            DgpKind::Confounded { theta_direct, .. } if !theta_direct.is_finite() => {
                return Err(Error::config("theta_direct must be finite"));
            }
            _ => 2,
        };
        if self.k < need {
            return Err(Error::config(format!("{:?} needs K >= {need}, got {}", self.kind, self.k)));
        }
        Ok(())
    }

    /// Natural test roles for this kind.
    pub fn roles(&self) -> Roles {
        let k = self.k;
        let (source, target): (Vec<usize>, Vec<usize>) = match self.kind {
            DgpKind::Null | DgpKind::EdgeRankOne | DgpKind::NonlinearQuadratic | DgpKind::Confounded { .. } => {
                (vec![0], vec![1])
            }
            DgpKind::Bulk => (vec![0], (1..k).collect()),
            DgpKind::RankR { .. } => ((0..k / 2).collect(), (k / 2..k).collect()),
            DgpKind::ManyToOne { sources } => ((0..sources).collect(), vec![sources]),
            DgpKind::GroupToGroup { sources, targets, .. } => {
                ((0..sources).collect(), (sources..sources + targets).collect())
            }
        };
        let confounder = match self.kind {
            DgpKind::Confounded { expose_confounder: true, .. } => Some(k),
            _ => None,
        };
        Roles { source, target, confounder }
    }
}

/// Orthonormal `n × r` frame from the QR factor of a Gaussian matrix.
fn random_frame(n: usize, r: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, r, |_, _| StandardNormal.sample(rng));
    g.qr().q().columns(0, r).into_owned()
}

/// Rank-`r` loading `B = σ U Vᵀ` (`n × m`) with `‖B‖_F² = total`.
pub fn rank_loading(n: usize, m: usize, r: usize, total: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_frame(n, r, &mut rng);
    let v = random_frame(m, r, &mut rng);
    let sigma = (total / r as f64).sqrt();
    u * v.transpose() * sigma
}

fn ar1(len: usize, rho: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sd0 = (1.0 / (1.0 - rho * rho)).sqrt();
    let mut out = Vec::with_capacity(len);
    let z: f64 = StandardNormal.sample(rng);
    let mut x = sd0 * z;
    out.push(x);
    for _ in 1..len {
        let e: f64 = StandardNormal.sample(rng);
        x = rho * x + e;
        out.push(x);
    }
    out
}

/// Seeded, reproducible panel for `dgp`.
pub fn generate(dgp: &DgpSpec) -> Result<TimeSeriesPanel> {
    dgp.validate()?;
    let (t, k, lag) = (dgp.t, dgp.k, dgp.tau_star);
    let len = t + lag;
    let mut rng = ChaCha8Rng::seed_from_u64(dgp.seed);
    let mut cols: Vec<Vec<f64>> = (0..k).map(|_| ar1(len, dgp.rho, &mut rng)).collect();
    let var_x = dgp.base_variance();
    let s = dgp.strength;

    // target[row] += Σ_i b_i source_i[row - lag], computed from the base columns
    let add_linear = |cols: &mut Vec<Vec<f64>>, target: usize, loads: &[(usize, f64)]| {
        for row in (lag..len).rev() {
            let inc: f64 = loads.iter().map(|&(i, b)| b * cols[i][row - lag]).sum();
            cols[target][row] += inc;
        }
    };

    let mut latent = None;
    match dgp.kind {
        DgpKind::Null => {}
        DgpKind::EdgeRankOne => add_linear(&mut cols, 1, &[(0, (s / var_x).sqrt())]),
        DgpKind::Bulk => {
            let b = (s / var_x).sqrt();
            for j in 1..=k.div_ceil(2).min(k - 1) {
                add_linear(&mut cols, j, &[(0, b)]);
            }
        }
        DgpKind::RankR { rank } => {
            let (m, n) = (k / 2, k - k / 2);
            let b = rank_loading(n, m, rank, s / var_x, derive_seed(dgp.seed, LOADING_STREAM));
            for j in 0..n {
                let loads: Vec<(usize, f64)> = (0..m).map(|i| (i, b[(j, i)])).collect();
                add_linear(&mut cols, m + j, &loads);
            }
        }
        DgpKind::ManyToOne { sources } => {
            let b = (s / (sources as f64 * var_x)).sqrt();
            let loads: Vec<(usize, f64)> = (0..sources).map(|i| (i, b)).collect();
            add_linear(&mut cols, sources, &loads);
        }
        DgpKind::GroupToGroup { sources, targets, rank } => {
            let b = rank_loading(targets, sources, rank, s / var_x, derive_seed(dgp.seed, LOADING_STREAM));
            for j in 0..targets {
                let loads: Vec<(usize, f64)> = (0..sources).map(|i| (i, b[(j, i)])).collect();
                add_linear(&mut cols, sources + j, &loads);
            }
        }
        DgpKind::NonlinearQuadratic => {
            // Var(x² − E x²) = 2 var_x² for a Gaussian stationary column
            let theta = (s / (2.0 * var_x * var_x)).sqrt();
            for row in (lag..len).rev() {
                let x = cols[0][row - lag];
                cols[1][row] += theta * (x * x - var_x);
            }
        }
        DgpKind::Confounded { theta_direct, .. } => {
            let mut hrng = ChaCha8Rng::seed_from_u64(derive_seed(dgp.seed, CONFOUNDER_STREAM));
            let h = ar1(len, CONFOUNDER_RHO, &mut hrng);
            for row in 0..len {
                cols[0][row] += h[row];
            }
            // the direct effect reads the confounded source
            for row in (lag..len).rev() {
                cols[1][row] += h[row] + theta_direct * cols[0][row - lag];
            }
            for row in 0..lag {
                cols[1][row] += h[row];
            }
            latent = Some(h);
        }
    }

    let mut labels: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
    if let (DgpKind::Confounded { expose_confounder: true, .. }, Some(h)) = (dgp.kind, latent) {
        cols.push(h);
        labels.push("h".into());
    }
    let trimmed: Vec<Vec<f64>> = cols.into_iter().map(|c| c[lag..].to_vec()).collect();
    TimeSeriesPanel::from_columns(labels, &trimmed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_determinism() {
        let d = DgpSpec::new(DgpKind::Bulk, 200, 6, 0.5, 11);
        assert_eq!(generate(&d).unwrap(), generate(&d).unwrap());
        assert_ne!(generate(&d).unwrap(), generate(&d.with_seed(12)).unwrap());
    }

    #[test]
    fn zero_strength_edge_is_null() {
        let null = DgpSpec::new(DgpKind::Null, 150, 4, 0.0, 3);
        let edge = DgpSpec { kind: DgpKind::EdgeRankOne, ..null };
        assert_eq!(generate(&null).unwrap().values(), generate(&edge).unwrap().values());
    }

    #[test]
    fn rank_loading_energy_is_fixed() {
        for r in [1, 4, 8, 16] {
            let b = rank_loading(16, 16, r, 2.5, 9);
            assert!((b.norm_squared() - 2.5).abs() < 1e-10, "rank {r}");
            assert_eq!(b.rank(1e-9), r);
        }
    }

    #[test]
    fn exposed_confounder_is_last_column() {
        let d = DgpSpec::new(DgpKind::Confounded { theta_direct: 0.0, expose_confounder: true }, 100, 2, 0.0, 1);
        let p = generate(&d).unwrap();
        assert_eq!(p.num_series(), 3);
        assert_eq!(d.roles().confounder, Some(2));
    }

    #[test]
    fn validation() {
        assert!(DgpSpec { rho: 1.0, ..DgpSpec::new(DgpKind::Null, 100, 2, 0.0, 0) }.validate().is_err());
        assert!(DgpSpec::new(DgpKind::RankR { rank: 9 }, 100, 16, 1.0, 0).validate().is_err());
        assert!(DgpSpec::new(DgpKind::Null, 100, 1, 0.0, 0).validate().is_err());
    }
}
