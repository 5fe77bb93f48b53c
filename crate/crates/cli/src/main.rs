mod args;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self as stdio, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use faultline::inference::{build_relation_network, InferenceError};
use faultline::io::{self, Ingested, IoError, NetworkProvenance};
use faultline::metrics::{evaluate_network, evaluate_subset, MetricError, MetricsConfig};
use faultline::partitioner::{select_k, Method, PartitionerError};
use faultline::pipeline::{self, Manifest, PipelineConfig, PipelineError};
use faultline::signed::{InteractionSubset, Partition, Selector, SignedNetwork};
use faultline::synth::{generate_network, generate_stream, PlantedConfig, SynthError};
use faultline::timeline::{
    detect_peaks, metric_timeline, sai_series, topic_subsets, window_subsets_within, TimelineError,
};
use thiserror::Error;

use args::{Cli, Command, MetricArgs};

#[derive(Debug, Error)]
enum CliError {
    /// Bad input files, flags or configuration.
    #[error("{0}")]
    User(String),
    /// A requested metric is undefined or degenerate on this data.
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

fn user(e: impl ToString) -> CliError {
    CliError::User(e.to_string())
}

fn at(path: &Path) -> impl Fn(IoError) -> CliError + '_ {
    move |e| CliError::User(format!("{}: {e}", path.display()))
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Undefined { .. } => CliError::Degenerate(e.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<PartitionerError> for CliError {
    fn from(e: PartitionerError) -> Self {
        user(e)
    }
}

impl From<TimelineError> for CliError {
    fn from(e: TimelineError) -> Self {
        user(e)
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        user(e)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        user(e)
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_undefined_metric() {
            CliError::Degenerate(e.to_string())
        } else if e.is_user_error() {
            CliError::User(e.to_string())
        } else {
            CliError::Other(e.to_string())
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Other(e.to_string())
    }
}

/// File at `path`, or stdout when absent or `-`.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if p != Path::new("-") => Ok(Box::new(pipeline::create_file(p)?)),
        _ => Ok(Box::new(stdio::stdout().lock())),
    }
}

fn read_interactions(path: &Path, format: Option<args::Format>) -> Result<Ingested, CliError> {
    let format = format
        .map(Into::into)
        .unwrap_or_else(|| io::InteractionFormat::from_path(path));
    let ingested = io::ingest(path, format).map_err(at(path))?;
    for w in &ingested.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(ingested)
}

fn read_network(path: &Path) -> Result<SignedNetwork, CliError> {
    let file = fs::File::open(path).map_err(|e| user(format!("{}: {e}", path.display())))?;
    Ok(io::read_network(BufReader::new(file)).map_err(at(path))?.network)
}

fn read_partition(path: &Path) -> Result<Partition, CliError> {
    let file = fs::File::open(path).map_err(|e| user(format!("{}: {e}", path.display())))?;
    io::read_partition(BufReader::new(file)).map_err(at(path))
}

fn metrics_config(m: &MetricArgs) -> MetricsConfig {
    let mut cfg = MetricsConfig {
        bootstrap_resamples: m.bootstrap,
        missing_nodes: m.missing_nodes.into(),
        ..MetricsConfig::default()
    };
    cfg.null.instances = m.null_instances;
    cfg.null.seed = m.seed;
    cfg
}

fn out_dir(flag: Option<PathBuf>, config: Option<&Path>) -> Result<PathBuf, CliError> {
    flag.or_else(|| config.map(Path::to_path_buf))
        .ok_or_else(|| user("no output directory: pass --out-dir or set FAULTLINE_OUT_DIR"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::IngestCheck { input, format } => {
            let got = read_interactions(&input, format)?;
            let its = &got.interactions;
            let mut users: Vec<&str> = its.iter().flat_map(|i| [i.rater.as_str(), i.author.as_str()]).collect();
            users.sort_unstable();
            users.dedup();
            let mut tags: BTreeMap<&str, usize> = BTreeMap::new();
            for t in its.iter().flat_map(|i| &i.tags) {
                *tags.entry(t).or_default() += 1;
            }
            let negative = its.iter().filter(|i| i.sign.is_negative()).count();
            println!("interactions: {}", its.len());
            println!("users: {}", users.len());
            println!("negative: {negative}");
            if let (Some(lo), Some(hi)) = (its.iter().map(|i| i.timestamp).min(), its.iter().map(|i| i.timestamp).max()) {
                println!("span: {} .. {}", io::iso8601(lo), io::iso8601(hi));
            }
            for (t, n) in tags {
                println!("tag {t}: {n}");
            }
            Ok(())
        }

        Command::BuildNet { input, format, output: out, edge } => {
            let got = read_interactions(&input, format)?;
            let prior = edge.prior()?;
            let rule = edge.rule();
            let network = build_relation_network(&got.interactions, prior, rule)?;
            eprintln!(
                "{} nodes, {} edges ({} negative) from {} interactions",
                network.node_count(),
                network.edge_count(),
                network.negative_edge_count(),
                got.interactions.len()
            );
            let provenance = NetworkProvenance {
                prior: Some(prior),
                rule: Some(rule),
            };
            io::write_network(output(out.as_deref())?, &network, &provenance)?;
            Ok(())
        }

        Command::Partition { network, output: out, restarts_out, solver } => {
            let net = read_network(&network)?;
            let method = solver.method()?;
            let selection = select_k(&net, &solver.k_values(), &method)?;
            for (k, s) in &selection.solutions {
                eprintln!("k={k}: frustration {} ({:?})", s.frustration, s.method);
            }
            let best = selection.best();
            eprintln!("k*={} frustration {}", selection.k_star, best.frustration);
            io::write_partition(output(out.as_deref())?, &best.partition)?;
            if let Some(path) = restarts_out {
                let restarts = selection
                    .solutions
                    .iter()
                    .filter(|(_, s)| s.method == Method::Anneal)
                    .map(|(k, s)| (*k, s.restart_best.clone()))
                    .collect();
                io::write_restarts_csv(pipeline::create_file(&path)?, &restarts)?;
            }
            Ok(())
        }

        Command::Metrics { network, partition, interactions, format, output: out, metrics } => {
            let part = read_partition(&partition)?;
            let cfg = metrics_config(&metrics);
            let report = match interactions {
                Some(path) => {
                    let got = read_interactions(&path, format)?;
                    evaluate_subset(&InteractionSubset::whole(got.interactions), &part, &cfg)?
                }
                None => evaluate_network(&read_network(&network)?, &part, &cfg)?,
            };
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report).map_err(|e| CliError::Other(e.to_string()))?;
            writeln!(w).map_err(|e| CliError::Other(e.to_string()))?;
            if report.degenerate {
                return Err(CliError::Degenerate("all signs in the target are equal; SAI is degenerate".into()));
            }
            Ok(())
        }

        Command::Topics { interactions, format, partition, tags, output: out, metrics } => {
            let got = read_interactions(&interactions, format)?;
            let part = read_partition(&partition)?;
            let tags: Vec<String> = if tags.is_empty() {
                let mut all: Vec<String> = got.interactions.iter().flat_map(|i| i.tags.iter().cloned()).collect();
                all.sort();
                all.dedup();
                all
            } else {
                tags
            };
            if tags.is_empty() {
                return Err(user("no tags given and none present in the data"));
            }
            let topics = topic_subsets(&got.interactions, &tags)?;
            for t in &topics.empty {
                eprintln!("warning: topic {t:?} has no interactions");
            }
            let cfg = metrics_config(&metrics);
            let mut rows = Vec::new();
            for (i, (tag, subset)) in topics.subsets.iter().enumerate() {
                let report = match evaluate_subset(subset, &part, &cfg.reseeded(faultline::seed::derive_seed(metrics.seed, i as u64))) {
                    Ok(r) => Some(r),
                    Err(e @ MetricError::Undefined { .. }) => {
                        eprintln!("warning: topic {tag:?}: {e}");
                        None
                    }
                    Err(e) => return Err(e.into()),
                };
                rows.push((subset.selector().to_string(), subset.len(), report));
            }
            io::write_report_rows(
                output(out.as_deref())?,
                part.k(),
                rows.iter().map(|(s, n, r)| (s.as_str(), *n, r.as_ref())),
            )?;
            Ok(())
        }

        Command::Timeline { interactions, format, partition, topic, window, peaks, output: out, metrics } => {
            let got = read_interactions(&interactions, format)?;
            let part = read_partition(&partition)?;
            let selector = topic.map(Selector::topic).unwrap_or_else(Selector::whole);
            let base = InteractionSubset::select(&got.interactions, selector);
            let windows = window_subsets_within(&base, &window.config()?)?;
            let points = metric_timeline(&windows, &part, &metrics_config(&metrics));
            let found = match detect_peaks(&sai_series(&points), &peaks.config()) {
                Ok(p) => p,
                Err(e @ TimelineError::TooFewPoints(_)) => {
                    eprintln!("warning: peak detection skipped: {e}");
                    Vec::new()
                }
                Err(e) => return Err(e.into()),
            };
            let gaps = points.iter().filter(|p| p.is_gap()).count();
            eprintln!("{} windows, {gaps} gaps, peaks at {found:?}", points.len());
            io::write_timeline_csv(output(out.as_deref())?, part.k(), &points, &found)?;
            Ok(())
        }

        Command::Synth { config, out_dir: dir } => {
            let text = fs::read_to_string(&config).map_err(|e| user(format!("{}: {e}", config.display())))?;
            let cfg: PlantedConfig = toml::from_str(&text).map_err(|e| user(format!("{}: {e}", config.display())))?;
            let dir = out_dir(dir, None)?;
            fs::create_dir_all(&dir).map_err(|e| user(format!("{}: {e}", dir.display())))?;
            let (network, planted) = if cfg.temporal.is_some() {
                let stream = generate_stream(&cfg)?;
                let path = dir.join("interactions.csv");
                io::write_interactions_csv(pipeline::create_file(&path)?, &stream.interactions)?;
                eprintln!("{} interactions -> {}", stream.interactions.len(), path.display());
                (stream.network, stream.planted)
            } else {
                generate_network(&cfg)?
            };
            io::write_network(
                pipeline::create_file(&dir.join("network.txt"))?,
                &network,
                &NetworkProvenance::default(),
            )?;
            io::write_partition(pipeline::create_file(&dir.join("planted.txt"))?, &planted)?;
            eprintln!(
                "{} nodes, {} edges -> {}",
                network.node_count(),
                network.edge_count(),
                dir.display()
            );
            Ok(())
        }

        Command::Run { config, manifest, out_dir: dir } => {
            let summary = match (config, manifest) {
                (Some(path), None) => {
                    let cfg = PipelineConfig::from_toml_file(&path)?;
                    let dir = out_dir(dir, cfg.output_dir.as_deref())?;
                    pipeline::run_pipeline(&cfg, &dir)?
                }
                (None, Some(path)) => {
                    let m = Manifest::read(&path)?;
                    let dir = out_dir(dir, None)?;
                    pipeline::rerun_manifest(&m, &dir)?
                }
                _ => return Err(user("pass exactly one of --config or --manifest")),
            };
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            let r = &summary.network_report;
            eprintln!(
                "k*={} frustration {} SAI {:.4} [{:.4}, {:.4}] -> {}",
                summary.selection.k_star,
                summary.selection.best().frustration,
                r.sai,
                r.sai_ci95.0,
                r.sai_ci95.1,
                summary.output_dir.display()
            );
            if summary.degenerate() {
                return Err(CliError::Degenerate(
                    "relation network has a single sign; SAI is degenerate".into(),
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(cli.log_level()))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
