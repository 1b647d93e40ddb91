//! The three workflows and the run manifest.

use chrono::{SecondsFormat, Utc};
use log::{info, warn};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use spectral_causality::embedding::EmbeddingSpec;
use spectral_causality::inference::{randomization_test, RandomizationPlan, TestStatistic};
use spectral_causality::monitor::{run_monitor, RollingReport};
use spectral_causality::operators::{build_family, OperatorKind};
use spectral_causality::panel::TimeSeriesPanel;
use spectral_causality::simulation::McResult;
use spectral_causality::spectral::{dispersion_measure, dispersion_scalar, effective_rank};

use crate::args::{Cli, Command};
use crate::config::{parse_feature_map, parse_operator, parse_statistic, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{ingest_csv, read_clusters};
use crate::output::{cell, opt, OutputDir};
use crate::preprocess::preprocess;

#[derive(Debug, Clone, Serialize)]
struct InputInfo {
    path: String,
    sha256: String,
    rows: usize,
    columns: usize,
    dropped_rows: usize,
    dropped_columns: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    status: &'static str,
    exit_code: u8,
    error: Option<String>,
    started_at: String,
    finished_at: String,
    config_hash: String,
    seed: Option<u64>,
    config: &'a RunConfig,
    input: Option<InputInfo>,
    details: Value,
    outputs: Vec<String>,
}

#[derive(Default)]
struct RunContext {
    input: Option<InputInfo>,
    details: Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the command name and the fully resolved configuration.
pub fn config_hash(command: &str, config: &RunConfig) -> String {
    let body = serde_json::to_vec(&(command, config)).expect("config serializes");
    sha256_hex(&body)
}

/// Resolves the configuration, runs the command and always leaves a
/// `manifest.json` in the output directory once that directory exists.
pub fn run(cli: &Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.apply(&mut config)?;
    let mut out = OutputDir::create(&config.output)?;
    let started = Utc::now();
    let mut ctx = RunContext::default();
    let result = execute(&cli.command, &config, &mut out, &mut ctx);

    let command = cli.command.name();
    let manifest = Manifest {
        tool: "speccaus",
        version: env!("CARGO_PKG_VERSION"),
        command,
        status: if result.is_ok() { "ok" } else { "error" },
        exit_code: result.as_ref().err().map_or(0, CliError::exit_code),
        error: result.as_ref().err().map(ToString::to_string),
        started_at: started.to_rfc3339_opts(SecondsFormat::Millis, true),
        finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        config_hash: config_hash(command, &config),
        seed: config.seed,
        config: &config,
        input: ctx.input,
        details: ctx.details,
        outputs: out.written().to_vec(),
    };
    let written = out.json("manifest.json", &manifest);
    result.and(written)
}

fn execute(command: &Command, config: &RunConfig, out: &mut OutputDir, ctx: &mut RunContext) -> Result<()> {
    // everything checkable without data is checked before any computation
    config.preprocess.validate()?;
    match command {
        Command::Simulate(_) => {
            config.simulate.experiments(config.seed)?;
        }
        Command::Test(_) => {
            config.input()?;
            config.test.validate()?;
        }
        Command::Monitor(_) => {
            config.input()?;
            config.monitor.to_core(0)?;
        }
    }
    let threads = match config.threads {
        Some(0) => return Err(CliError::config("threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| match command {
        Command::Simulate(_) => simulate(config, out, ctx),
        Command::Test(_) => test(config, out, ctx),
        Command::Monitor(_) => monitor(config, out, ctx),
    })
}

fn load_input(config: &RunConfig, ctx: &mut RunContext) -> Result<TimeSeriesPanel> {
    let path = config.input()?;
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let ingested = ingest_csv(path)?;
    let (panel, dropped_columns) = preprocess(&ingested.panel, &config.preprocess)?;
    info!("{}: {} rows, {} series after preprocessing", path.display(), panel.len(), panel.num_series());
    ctx.input = Some(InputInfo {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
        rows: panel.len(),
        columns: panel.num_series(),
        dropped_rows: ingested.dropped_rows,
        dropped_columns,
    });
    Ok(panel)
}

fn resolve_labels(panel: &TimeSeriesPanel, names: &[String], dropped: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            panel.index_of(n).ok_or_else(|| {
                if dropped.contains(n) {
                    CliError::data(format!("series '{n}' has zero variance and was dropped"))
                } else {
                    CliError::config(format!("no series named '{n}' (columns: {})", panel.labels().join(", ")))
                }
            })
        })
        .collect()
}

fn simulate(config: &RunConfig, out: &mut OutputDir, ctx: &mut RunContext) -> Result<()> {
    let experiments = config.simulate.experiments(config.seed)?;
    ctx.details = json!({ "experiments": experiments });
    let mut results: Vec<(String, McResult)> = Vec::new();
    for e in &experiments {
        info!("running {} ({} reps)", e.name, e.reps);
        results.push((e.name.clone(), e.run()?));
    }

    let header: Vec<String> = [
        "experiment", "T", "K", "strength", "seed", "reps", "alpha", "method", "rejection_rate", "std_error",
        "mean_max_lambda1", "mean_max_kappa",
    ]
    .map(String::from)
    .to_vec();
    let rows = results.iter().flat_map(|(name, r)| {
        r.cells.iter().map(move |c| {
            vec![
                name.clone(),
                r.dgp.t.to_string(),
                r.dgp.k.to_string(),
                cell(r.dgp.strength),
                r.dgp.seed.to_string(),
                r.reps.to_string(),
                cell(r.alpha),
                c.method.clone(),
                cell(c.rejection_rate),
                cell(c.std_error),
                cell(r.diagnostics.mean_max_lambda1),
                opt(r.diagnostics.mean_max_kappa),
            ]
        })
    });
    out.csv("cells.csv", &header, rows)?;
    let named: Vec<Value> = results.iter().map(|(name, r)| json!({ "experiment": name, "result": r })).collect();
    out.json("results.json", &named)
}

#[derive(Serialize)]
struct TestReport<'a> {
    source: &'a [String],
    target: &'a [String],
    conditioning: &'a [String],
    statistic: String,
    operator: OperatorKind,
    lags: &'a [usize],
    weights: &'a [f64],
    effective_t: usize,
    observed: f64,
    p_value: f64,
    tail: spectral_causality::inference::Tail,
    num_shifts: usize,
    seed: u64,
    sup_lag: usize,
    inf_lag: usize,
    shifts: &'a [usize],
    replicates: &'a [f64],
}

fn test(config: &RunConfig, out: &mut OutputDir, ctx: &mut RunContext) -> Result<()> {
    let t = &config.test;
    let panel = load_input(config, ctx)?;
    let dropped = ctx.input.as_ref().map(|i| i.dropped_columns.clone()).unwrap_or_default();
    let source = resolve_labels(&panel, &t.source, &dropped)?;
    let target = resolve_labels(&panel, &t.target, &dropped)?;
    let conditioning = resolve_labels(&panel, &t.condition, &dropped)?;

    let mut spec = EmbeddingSpec::linear(source, target, t.source_depth, t.target_depth)
        .with_source_map(parse_feature_map(&t.source_map)?);
    if !conditioning.is_empty() {
        spec = spec.with_conditioning(conditioning, t.conditioning_depth);
    }
    spec.validate(panel.num_series())?;
    let deformation = t.deformation()?;
    let kind = parse_operator(&t.operator)?;
    let statistic = parse_statistic(&t.statistic)?;
    let seed = config.seed.unwrap_or(0);
    let plan = RandomizationPlan::new(t.shifts, seed).with_tail(t.tail);

    let result = randomization_test(&panel, &spec, &deformation, kind, t.ridge, statistic, &plan)?;
    let family = build_family(&panel, &spec, &deformation, kind, t.ridge)?;
    let dispersion = match statistic {
        TestStatistic::Dispersion { summary } => dispersion_scalar(&family, summary)?,
        TestStatistic::MeasureDispersion => dispersion_measure(&family)?,
    };

    let report = TestReport {
        source: &t.source,
        target: &t.target,
        conditioning: &t.condition,
        statistic: statistic.name(),
        operator: kind,
        lags: deformation.lags(),
        weights: deformation.weights(),
        effective_t: family.effective_t,
        observed: result.observed,
        p_value: result.p_value,
        tail: result.tail,
        num_shifts: result.shifts.len(),
        seed,
        sup_lag: dispersion.sup_lag,
        inf_lag: dispersion.inf_lag,
        shifts: &result.shifts,
        replicates: &result.replicates,
    };
    out.json("result.json", &report)?;

    let header: Vec<String> =
        ["lag", "weight", "summary", "lambda1", "trace", "eff_rank", "kappa"].map(String::from).to_vec();
    let rows = family.per_lag.iter().map(|op| {
        let summary = dispersion.per_lag_values.iter().find(|v| v.0 == op.lag).map(|v| v.1);
        vec![
            op.lag.to_string(),
            cell(op.weight),
            opt(summary),
            cell(op.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l))),
            cell(op.eigenvalues.iter().map(|l| l.max(0.0)).sum()),
            cell(effective_rank(&op.eigenvalues)),
            opt(op.coherence.as_ref().map(|c| c.kappa())),
        ]
    });
    out.csv("per_lag.csv", &header, rows)?;
    info!("{} = {:.6}, p = {:.4}", report.statistic, result.observed, result.p_value);
    Ok(())
}

fn monitor(config: &RunConfig, out: &mut OutputDir, ctx: &mut RunContext) -> Result<()> {
    let seed = config.seed.unwrap_or(0);
    let core = config.monitor.to_core(seed)?;
    let clusters = config.monitor.clusters.as_deref().map(read_clusters).transpose()?;
    let panel = load_input(config, ctx)?;
    let report = run_monitor(&panel, &core, clusters.as_deref())?;
    for w in &report.windows {
        for msg in &w.warnings {
            warn!("window {} ({}): {msg}", w.index, w.window_end);
        }
    }
    ctx.details = json!({
        "seed": seed,
        "windows": report.windows.len(),
        "episodes": report.episodes.len(),
    });
    write_monitor(&report, out)
}

fn episode_path(i: usize, what: &str) -> String {
    format!("networks/episode_{i}_{what}.csv")
}

/// Writes `windows.csv`, hub and turnover series, per-episode network and
/// dominance matrices, `macro_hubs.csv` when clusters were given, and
/// `episodes.json`.
pub fn write_monitor(report: &RollingReport, out: &mut OutputDir) -> Result<()> {
    let lags = report.config.lags.lags();
    let mut header: Vec<String> = [
        "window", "window_start", "window_end", "lambda1", "p_lambda1", "trace", "p_trace", "eff_rank", "p_effrank",
        "tau_com", "D", "hub_rank",
    ]
    .map(String::from)
    .to_vec();
    header.extend(lags.iter().map(|l| format!("E_tau_{l}")));
    let rows = report.windows.iter().map(|w| {
        let mut row = vec![
            w.index.to_string(),
            w.window_start.to_string(),
            w.window_end.to_string(),
            cell(w.lambda1),
            cell(w.p_lambda1),
            cell(w.trace),
            cell(w.p_trace),
            cell(w.eff_rank),
            cell(w.p_effrank),
            opt(w.tau_com),
            opt(w.dominance),
            w.hub_rank.to_string(),
        ];
        row.extend(w.lag_energy.iter().map(|e| cell(e.1)));
        row
    });
    out.csv("windows.csv", &header, rows)?;

    let labelled = |first: &str| -> Vec<String> {
        std::iter::once(first.to_string()).chain(report.labels.iter().cloned()).collect()
    };
    for (name, side) in [("hubs_target.csv", true), ("hubs_source.csv", false)] {
        let rows = report.windows.iter().map(|w| {
            let scores = if side { &w.hub_target } else { &w.hub_source };
            std::iter::once(w.window_end.to_string()).chain(scores.iter().map(|&s| cell(s))).collect()
        });
        out.csv(name, &labelled("window_end"), rows)?;
    }
    let rows = report.windows.iter().skip(1).zip(&report.turnover).map(|(w, &v)| vec![w.window_end.to_string(), cell(v)]);
    out.csv("turnover.csv", &["window_end".into(), "turnover".into()], rows)?;

    if let Some(m) = &report.macro_hubs {
        let mut header = vec!["window_end".to_string()];
        header.extend(m.clusters.iter().cloned());
        header.push("dominant".into());
        let rows = report.windows.iter().enumerate().map(|(w, win)| {
            let mut row = vec![win.window_end.to_string()];
            row.extend(m.series.iter().map(|s| cell(s[w])));
            row.push(m.dominant[w].clone());
            row
        });
        out.csv("macro_hubs.csv", &header, rows)?;
    }

    let mut episodes = Vec::new();
    for (i, en) in report.episode_networks.iter().enumerate() {
        let p = en.network.p_values.map(Some);
        let dom = en.dominance_map.map(|v| if v.is_finite() { Some(v) } else { None });
        out.matrix(&episode_path(i, "network"), &report.labels, &en.network.masked())?;
        out.matrix(&episode_path(i, "pvalues"), &report.labels, &p)?;
        out.matrix(&episode_path(i, "dominance"), &report.labels, &dom)?;
        let ep = &en.episode;
        let clusters = report.macro_hubs.as_ref().map(|m| {
            let range = ep.first_window..=ep.last_window;
            let n = range.clone().count() as f64;
            let means: Vec<Value> = m
                .clusters
                .iter()
                .zip(&m.series)
                .map(|(c, s)| json!({ "cluster": c, "mean_hub": s[range.clone()].iter().sum::<f64>() / n }))
                .collect();
            let mut counts: Vec<(String, usize)> = Vec::new();
            for d in &m.dominant[range] {
                match counts.iter_mut().find(|c| &c.0 == d) {
                    Some(c) => c.1 += 1,
                    None => counts.push((d.clone(), 1)),
                }
            }
            let dominant = counts.iter().fold(&counts[0], |best, c| if c.1 > best.1 { c } else { best }).0.clone();
            json!({ "dominant_cluster": dominant, "clusters": means })
        });
        let retained = (0..en.network.mean.nrows())
            .flat_map(|j| (0..en.network.mean.ncols()).map(move |i| (j, i)))
            .filter(|&(j, i)| en.network.retained(j, i))
            .count();
        episodes.push(json!({
            "id": i,
            "first_window": ep.first_window,
            "last_window": ep.last_window,
            "start": ep.start.to_string(),
            "end": ep.end.to_string(),
            "retained_edges": retained,
            "network": episode_path(i, "network"),
            "p_values": episode_path(i, "pvalues"),
            "dominance": episode_path(i, "dominance"),
            "macro_hubs": clusters,
        }));
    }
    let index = json!({
        "alpha": report.config.alpha,
        "network_alpha": report.config.network_alpha,
        "num_windows": report.windows.len(),
        "labels": report.labels,
        "episodes": episodes,
    });
    out.json("episodes.json", &index)
}

/// Runs the binary's entry point on `argv` and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
