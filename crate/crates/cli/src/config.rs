//! Run configuration: a TOML file whose keys mirror the command-line flags.
//!
//! ```toml
//! seed = 7
//! output = "out"
//! input = "returns.csv"
//!
//! [preprocess]
//! winsor_low = 0.005
//! winsor_high = 0.995
//! standardize = true
//!
//! [test]
//! source = ["oil"]
//! target = ["spx", "dax"]
//! lags = "1..5"
//! statistic = "frobenius"
//!
//! [monitor]
//! preset = "paper-empirical"
//! shifts = 99
//!
//! [simulate]
//! preset = "table1"
//! cells = ["T=1000,K=20"]
//! ```
//!
//! Resolution order: built-in defaults, then the file, then the named
//! preset (which resets every parameter it pins), then flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use spectral_causality::embedding::{DeformationSet, FeatureMap};
use spectral_causality::inference::{Tail, TestStatistic};
use spectral_causality::monitor::MonitorConfig;
use spectral_causality::operators::{OperatorKind, DEFAULT_RIDGE};
use spectral_causality::simulation::presets::{self, Experiment};
use spectral_causality::simulation::DgpKind;
use spectral_causality::spectral::SpectralSummary;

use crate::error::{CliError, Result};
use crate::preprocess::PreprocessConfig;

pub const EMPIRICAL_PRESET: &str = "paper-empirical";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. Test and monitor runs default to 0; simulation presets
    /// keep their own seeds unless this is set.
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub output: PathBuf,
    pub input: Option<PathBuf>,
    pub preprocess: PreprocessConfig,
    pub test: TestSection,
    pub monitor: MonitorSection,
    pub simulate: SimulateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            threads: None,
            output: PathBuf::from("speccaus-out"),
            input: None,
            preprocess: PreprocessConfig::default(),
            test: TestSection::default(),
            monitor: MonitorSection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| CliError::config("no input file given (--input)"))
    }
}

/// A lag set written either as a list or as text: `"1..5"` and `"1..=5"`
/// are both inclusive, `"1,2,3,5"` lists lags explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lags {
    List(Vec<usize>),
    Text(String),
}

impl Lags {
    pub fn resolve(&self) -> Result<Vec<usize>> {
        match self {
            Lags::List(v) => Ok(v.clone()),
            Lags::Text(s) => parse_lags(s),
        }
    }
}

pub fn parse_lags(s: &str) -> Result<Vec<usize>> {
    let bad = || CliError::config(format!("cannot parse lag set '{s}'"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn split_kv(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((k, v)) => (k.trim(), Some(v.trim())),
        None => (s.trim(), None),
    }
}

/// `trace`, `frobenius`, `logdet[:eps]`, `power:q`, `lambda1` or `wasserstein`.
pub fn parse_statistic(s: &str) -> Result<TestStatistic> {
    let (name, arg) = split_kv(s);
    let num = |a: Option<&str>| -> Result<f64> {
        a.ok_or_else(|| CliError::config(format!("statistic '{s}' needs a parameter")))?
            .parse()
            .map_err(|_| CliError::config(format!("bad parameter in statistic '{s}'")))
    };
    let summary = match name.to_ascii_lowercase().as_str() {
        "wasserstein" | "spec" | "measure" => return Ok(TestStatistic::MeasureDispersion),
        "trace" => SpectralSummary::Trace,
        "frobenius" => SpectralSummary::Frobenius,
        "logdet" if arg.is_none() => SpectralSummary::log_det(),
        "logdet" => SpectralSummary::LogDet { eps: num(arg)? },
        "power" => SpectralSummary::Power { q: num(arg)? },
        "lambda1" => SpectralSummary::LargestEigenvalue,
        _ => return Err(CliError::config(format!("unknown statistic '{s}'"))),
    };
    summary.validate()?;
    Ok(TestStatistic::Dispersion { summary })
}

/// `gram` (the default) or `stacked`.
pub fn parse_operator(s: &str) -> Result<OperatorKind> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gram" | "coherence" | "directed_coherence_gram" => Ok(OperatorKind::DirectedCoherenceGram),
        "stacked" | "stacked_covariance" => Ok(OperatorKind::StackedCovariance),
        _ => Err(CliError::config(format!("unknown operator '{s}' (expected gram or stacked)"))),
    }
}

/// `identity` or `monomials:d`.
pub fn parse_feature_map(s: &str) -> Result<FeatureMap> {
    let map = match split_kv(s) {
        ("identity", None) => FeatureMap::Identity,
        ("monomials", Some(d)) => FeatureMap::Monomials {
            max_degree: d.parse().map_err(|_| CliError::config(format!("bad degree in '{s}'")))?,
        },
        _ => return Err(CliError::config(format!("unknown feature map '{s}' (expected identity or monomials:d)"))),
    };
    map.validate()?;
    Ok(map)
}

pub fn parse_tail(s: &str) -> Result<Tail> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "upper" => Ok(Tail::Upper),
        "two_sided" => Ok(Tail::TwoSided),
        _ => Err(CliError::config(format!("unknown tail '{s}' (expected upper or two-sided)"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSection {
    pub source: Vec<String>,
    pub target: Vec<String>,
    /// Observed confounders projected out of both blocks.
    pub condition: Vec<String>,
    pub source_depth: usize,
    pub target_depth: usize,
    pub conditioning_depth: usize,
    pub lags: Lags,
    /// Lag weights; uniform when absent.
    pub weights: Option<Vec<f64>>,
    pub statistic: String,
    pub operator: String,
    pub source_map: String,
    pub ridge: f64,
    pub shifts: usize,
    pub tail: Tail,
}

impl Default for TestSection {
    fn default() -> Self {
        Self {
            source: Vec::new(),
            target: Vec::new(),
            condition: Vec::new(),
            source_depth: 1,
            target_depth: 1,
            conditioning_depth: 1,
            lags: Lags::Text("1..5".into()),
            weights: None,
            statistic: "trace".into(),
            operator: "gram".into(),
            source_map: "identity".into(),
            ridge: DEFAULT_RIDGE,
            shifts: 100,
            tail: Tail::Upper,
        }
    }
}

impl TestSection {
    pub fn deformation(&self) -> Result<DeformationSet> {
        let lags = self.lags.resolve()?;
        let set = match &self.weights {
            Some(w) => DeformationSet::new(lags, w.clone())?,
            None => DeformationSet::uniform(lags)?,
        };
        Ok(set)
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.source.is_empty() || self.target.is_empty() {
            return Err(CliError::config("test needs at least one --source and one --target series"));
        }
        if self.shifts == 0 {
            return Err(CliError::config("shifts must be at least 1"));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(CliError::config(format!("ridge must be a finite non-negative number, got {}", self.ridge)));
        }
        self.deformation()?;
        parse_statistic(&self.statistic)?;
        parse_operator(&self.operator)?;
        parse_feature_map(&self.source_map)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorSection {
    pub preset: Option<String>,
    pub window: usize,
    pub step: usize,
    pub depth: usize,
    pub lags: Lags,
    pub ridge: f64,
    pub shifts: usize,
    pub alpha: f64,
    pub network_alpha: f64,
    pub top_k_hubs: usize,
    pub hub_rank: Option<usize>,
    pub early_lags: Vec<usize>,
    pub late_lags: Vec<usize>,
    /// `driver,label` CSV grouping series into clusters.
    pub clusters: Option<PathBuf>,
}

impl Default for MonitorSection {
    fn default() -> Self {
        let mut s = Self {
            preset: None,
            window: 0,
            step: 0,
            depth: 0,
            lags: Lags::List(Vec::new()),
            ridge: 0.0,
            shifts: 0,
            alpha: 0.0,
            network_alpha: 0.0,
            top_k_hubs: 0,
            hub_rank: None,
            early_lags: Vec::new(),
            late_lags: Vec::new(),
            clusters: None,
        };
        s.pin_empirical_values();
        s
    }
}

impl MonitorSection {
    fn pin_empirical_values(&mut self) {
        let p = MonitorConfig::empirical();
        self.window = p.window;
        self.step = p.step;
        self.depth = p.depth;
        self.lags = Lags::List(p.lags.lags().to_vec());
        self.ridge = p.ridge;
        self.shifts = p.num_shifts;
        self.alpha = p.alpha;
        self.network_alpha = p.network_alpha;
        self.top_k_hubs = p.top_k_hubs;
        self.hub_rank = p.hub_rank;
        self.early_lags = p.early_lags;
        self.late_lags = p.late_lags;
    }

    pub fn apply_preset(&mut self) -> Result<()> {
        match self.preset.as_deref() {
            None => Ok(()),
            Some(EMPIRICAL_PRESET) => {
                self.pin_empirical_values();
                Ok(())
            }
            Some(other) => Err(CliError::config(format!("unknown monitor preset '{other}' (expected {EMPIRICAL_PRESET})"))),
        }
    }

    pub fn to_core(&self, seed: u64) -> Result<MonitorConfig> {
        let config = MonitorConfig {
            window: self.window,
            step: self.step,
            depth: self.depth,
            lags: DeformationSet::uniform(self.lags.resolve()?)?,
            ridge: self.ridge,
            num_shifts: self.shifts,
            alpha: self.alpha,
            network_alpha: self.network_alpha,
            top_k_hubs: self.top_k_hubs,
            hub_rank: self.hub_rank,
            early_lags: self.early_lags.clone(),
            late_lags: self.late_lags.clone(),
            seed,
            ..MonitorConfig::empirical()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub preset: Option<String>,
    /// Cell filters such as `"T=1000,K=20"`; keys `T`, `K`, `s` (strength),
    /// `r` (rank), `theta`, `conditional`. Empty runs every cell.
    pub cells: Vec<String>,
    pub reps: Option<usize>,
    pub alpha: Option<f64>,
}

type Cell = Vec<(String, String)>;

fn parse_cell(s: &str) -> Result<Cell> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::config(format!("bad cell '{s}' (expected key=value,…)")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn cell_matches(e: &Experiment, cell: &Cell) -> Result<bool> {
    for (k, v) in cell {
        let bad = || CliError::config(format!("bad value '{v}' for cell key '{k}'"));
        let num = || v.parse::<f64>().map_err(|_| bad());
        let hit = match k.as_str() {
            "T" | "t" => e.dgp.t as f64 == num()?,
            "K" | "k" => e.dgp.k as f64 == num()?,
            "s" | "strength" => e.dgp.strength == num()?,
            "r" | "rank" => match e.dgp.kind {
                DgpKind::RankR { rank } | DgpKind::GroupToGroup { rank, .. } => rank as f64 == num()?,
                _ => false,
            },
            "theta" => match e.dgp.kind {
                DgpKind::Confounded { theta_direct, .. } => theta_direct == num()?,
                _ => false,
            },
            "conditional" => e.pipeline.condition_on_confounder == v.parse::<bool>().map_err(|_| bad())?,
            _ => return Err(CliError::config(format!("unknown cell key '{k}'"))),
        };
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

impl SimulateSection {
    /// The experiments to run, with seed, replicate and level overrides applied.
    pub fn experiments(&self, seed: Option<u64>) -> Result<Vec<Experiment>> {
        let name = self.preset.as_deref().ok_or_else(|| CliError::config("simulate needs --preset"))?;
        let all = presets::by_name(name).ok_or_else(|| {
            CliError::config(format!("unknown preset '{name}' (expected one of {})", presets::PRESET_NAMES.join(", ")))
        })?;
        let cells = self.cells.iter().map(|c| parse_cell(c)).collect::<Result<Vec<_>>>()?;
        let mut chosen = Vec::new();
        if cells.is_empty() {
            chosen = all;
        } else {
            for cell in &cells {
                let before = chosen.len();
                for e in &all {
                    if cell_matches(e, cell)? {
                        chosen.push(e.clone());
                    }
                }
                if chosen.len() == before {
                    // the size table accepts any (T, K)
                    let get = |key: &str| cell.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)).map(|kv| kv.1.parse::<usize>());
                    match (name, get("T"), get("K")) {
                        ("table1", Some(Ok(t)), Some(Ok(k))) if cell.len() == 2 => chosen.push(presets::table1(t, k)),
                        _ => return Err(CliError::config(format!("no cell of preset '{name}' matches the filter"))),
                    }
                }
            }
        }
        for e in &mut chosen {
            if let Some(reps) = self.reps {
                e.reps = reps;
            }
            if let Some(alpha) = self.alpha {
                e.alpha = alpha;
            }
            if let Some(seed) = seed {
                e.dgp.seed = seed;
            }
            if e.reps == 0 {
                return Err(CliError::config("reps must be at least 1"));
            }
            if !(e.alpha > 0.0 && e.alpha < 1.0) {
                return Err(CliError::config(format!("alpha must lie in (0, 1), got {}", e.alpha)));
            }
            e.dgp.validate()?;
            e.pipeline.validate()?;
        }
        Ok(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_text_forms() {
        assert_eq!(parse_lags("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_lags("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_lags("1, 2,3,5").unwrap(), vec![1, 2, 3, 5]);
        assert!(parse_lags("5..1").is_err());
        assert!(parse_lags("a").is_err());
    }

    #[test]
    fn statistic_names() {
        assert_eq!(parse_statistic("wasserstein").unwrap(), TestStatistic::MeasureDispersion);
        assert_eq!(
            parse_statistic("logdet:1e-6").unwrap(),
            TestStatistic::Dispersion { summary: SpectralSummary::LogDet { eps: 1e-6 } }
        );
        assert!(parse_statistic("power").is_err());
        assert!(parse_statistic("power:0.5").is_err());
        assert!(parse_statistic("median").is_err());
    }

    #[test]
    fn file_round_trips_and_rejects_unknown_keys() {
        let cfg = RunConfig::from_toml(
            "seed = 3\n[test]\nsource = ['a']\ntarget = ['b']\nlags = [1, 3]\n[monitor]\nshifts = 99\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.test.lags.resolve().unwrap(), vec![1, 3]);
        assert_eq!(cfg.monitor.shifts, 99);
        assert_eq!(cfg.monitor.window, 252);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert!(RunConfig::from_toml("[test]\nsorce = ['a']\n").is_err());
    }

    #[test]
    fn empirical_preset_resets_monitor_parameters() {
        let mut m = MonitorSection { window: 100, preset: Some(EMPIRICAL_PRESET.into()), ..MonitorSection::default() };
        m.apply_preset().unwrap();
        assert_eq!(m.to_core(0).unwrap(), MonitorConfig::empirical());
        m.preset = Some("other".into());
        assert!(m.apply_preset().is_err());
    }

    #[test]
    fn cell_filters() {
        let sim = |cells: &[&str]| SimulateSection {
            preset: Some("table1".into()),
            cells: cells.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        let got = sim(&["T=1000,K=20"]).experiments(None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].dgp.t, got[0].dgp.k), (1000, 20));
        assert_eq!(sim(&["T=600,K=3"]).experiments(Some(9)).unwrap()[0].dgp.seed, 9);
        assert_eq!(sim(&[]).experiments(None).unwrap().len(), 4);
        assert!(sim(&["Q=1"]).experiments(None).is_err());

        let t3 = SimulateSection { preset: Some("table3".into()), cells: vec!["theta=0,conditional=true".into()], ..Default::default() };
        let got = t3.experiments(None).unwrap();
        assert_eq!(got.len(), 1);
        assert!(got[0].pipeline.condition_on_confounder);
    }
}
