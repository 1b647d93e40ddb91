//! Command-line flags. Every flag has a config-file twin and wins over it.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::config::{parse_tail, Lags, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "speccaus", version, about = "Lag-ordered spectral causality tests and rolling monitoring")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo rejection rates for a named experiment preset.
    Simulate(SimulateArgs),
    /// One randomization test on a CSV panel.
    Test(TestArgs),
    /// Rolling-window monitoring of a CSV panel.
    Monitor(MonitorArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Test(_) => "test",
            Command::Monitor(_) => "monitor",
        }
    }
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub winsor_low: Option<f64>,
    #[arg(long)]
    pub winsor_high: Option<f64>,
    #[arg(long, action = ArgAction::Set)]
    pub standardize: Option<bool>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// table1, table2, table3, edge, bulk, rank, many-to-one or group-to-group.
    #[arg(long)]
    pub preset: Option<String>,
    /// Cell filter such as `T=1000,K=20`; repeatable.
    #[arg(long = "cell")]
    pub cells: Vec<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    /// Source series labels (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub source: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub target: Vec<String>,
    /// Observed confounders to residualize on.
    #[arg(long, value_delimiter = ',')]
    pub condition: Vec<String>,
    #[arg(long)]
    pub source_depth: Option<usize>,
    #[arg(long)]
    pub target_depth: Option<usize>,
    #[arg(long)]
    pub conditioning_depth: Option<usize>,
    /// `1..5` (inclusive) or `1,2,3,5`.
    #[arg(long)]
    pub lags: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// trace, frobenius, logdet[:eps], power:q, lambda1 or wasserstein.
    #[arg(long, visible_alias = "summary")]
    pub statistic: Option<String>,
    /// gram or stacked.
    #[arg(long)]
    pub operator: Option<String>,
    /// identity or monomials:d.
    #[arg(long)]
    pub source_map: Option<String>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub shifts: Option<usize>,
    /// upper or two-sided.
    #[arg(long)]
    pub tail: Option<String>,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    /// `paper-empirical` pins every window, lag and threshold parameter to the empirical defaults.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub lags: Option<String>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub shifts: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub network_alpha: Option<f64>,
    #[arg(long)]
    pub top_k_hubs: Option<usize>,
    #[arg(long)]
    pub hub_rank: Option<usize>,
    #[arg(long)]
    pub early_lags: Option<String>,
    #[arg(long)]
    pub late_lags: Option<String>,
    /// `driver,label` CSV.
    #[arg(long)]
    pub clusters: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl PreprocessArgs {
    fn apply(&self, config: &mut RunConfig) {
        set(&mut config.preprocess.winsor_low, self.winsor_low);
        set(&mut config.preprocess.winsor_high, self.winsor_high);
        set(&mut config.preprocess.standardize, self.standardize);
    }
}

impl Cli {
    /// Applies the subcommand's preset and then every flag to `config`.
    pub fn apply(&self, config: &mut RunConfig) -> Result<()> {
        config.seed = self.seed.or(config.seed);
        config.threads = self.threads.or(config.threads);
        set(&mut config.output, self.output.clone());
        match &self.command {
            Command::Simulate(a) => {
                let s = &mut config.simulate;
                s.preset = a.preset.clone().or(s.preset.take());
                if !a.cells.is_empty() {
                    s.cells = a.cells.clone();
                }
                s.reps = a.reps.or(s.reps);
                s.alpha = a.alpha.or(s.alpha);
            }
            Command::Test(a) => {
                config.input = a.input.clone().or(config.input.take());
                a.preprocess.apply(config);
                let t = &mut config.test;
                for (slot, flag) in [(&mut t.source, &a.source), (&mut t.target, &a.target), (&mut t.condition, &a.condition)] {
                    if !flag.is_empty() {
                        *slot = flag.clone();
                    }
                }
                set(&mut t.source_depth, a.source_depth);
                set(&mut t.target_depth, a.target_depth);
                set(&mut t.conditioning_depth, a.conditioning_depth);
                set(&mut t.lags, a.lags.clone().map(Lags::Text));
                if a.weights.is_some() {
                    t.weights = a.weights.clone();
                }
                set(&mut t.statistic, a.statistic.clone());
                set(&mut t.operator, a.operator.clone());
                set(&mut t.source_map, a.source_map.clone());
                set(&mut t.ridge, a.ridge);
                set(&mut t.shifts, a.shifts);
                set(&mut t.tail, a.tail.as_deref().map(parse_tail).transpose()?);
            }
            Command::Monitor(a) => {
                config.input = a.input.clone().or(config.input.take());
                a.preprocess.apply(config);
                let m = &mut config.monitor;
                m.preset = a.preset.clone().or(m.preset.take());
                m.apply_preset()?;
                set(&mut m.window, a.window);
                set(&mut m.step, a.step);
                set(&mut m.depth, a.depth);
                set(&mut m.lags, a.lags.clone().map(Lags::Text));
                set(&mut m.ridge, a.ridge);
                set(&mut m.shifts, a.shifts);
                set(&mut m.alpha, a.alpha);
                set(&mut m.network_alpha, a.network_alpha);
                set(&mut m.top_k_hubs, a.top_k_hubs);
                m.hub_rank = a.hub_rank.or(m.hub_rank);
                set(&mut m.early_lags, a.early_lags.as_deref().map(crate::config::parse_lags).transpose()?);
                set(&mut m.late_lags, a.late_lags.as_deref().map(crate::config::parse_lags).transpose()?);
                m.clusters = a.clusters.clone().or(m.clusters.take());
            }
        }
        Ok(())
    }
}
