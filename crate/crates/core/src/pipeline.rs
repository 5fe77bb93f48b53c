//! End-to-end runs: ingest, relation network, partition, metrics (global,
//! per topic, over time) and a manifest that reproduces the run.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inference::{build_relation_network, BetaPrior, EdgeRule, InferenceError};
use crate::io::{self, InteractionFormat, IoError, NetworkProvenance};
use crate::metrics::{evaluate_network, evaluate_subset, MetricError, MetricsConfig, MetricsReport};
use crate::partitioner::{select_k, KSelection, Method, PartitionerError, SolveMethod};
use crate::seed::stage_seed;
use crate::signed::{InteractionSubset, MissingNodePolicy};
use crate::timeline::{
    detect_peaks, metric_timeline, sai_series, topic_subsets, window_subsets, PeakConfig,
    RollingWindowConfig, TimelineError,
};

pub const NETWORK_FILE: &str = "network.txt";
pub const PARTITION_FILE: &str = "partition.txt";
pub const METRICS_FILE: &str = "metrics.json";
pub const TOPICS_FILE: &str = "topics.csv";
pub const TIMELINE_FILE: &str = "timeline.csv";
pub const RESTARTS_FILE: &str = "restarts.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorPreset {
    Uniform,
    SkewedNegative,
}

/// A named platform prior or explicit Beta parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorSpec {
    Preset(PriorPreset),
    Explicit(BetaPrior),
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::Preset(PriorPreset::Uniform)
    }
}

impl PriorSpec {
    pub fn resolve(&self) -> BetaPrior {
        match self {
            PriorSpec::Preset(PriorPreset::Uniform) => BetaPrior::uniform(),
            PriorSpec::Preset(PriorPreset::SkewedNegative) => BetaPrior::skewed_negative(),
            PriorSpec::Explicit(p) => *p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl From<InputFormat> for InteractionFormat {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Csv => InteractionFormat::Csv,
            InputFormat::Jsonl => InteractionFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartitionSettings {
    pub k_range: Vec<usize>,
    pub solver: SolveMethod,
}

impl Default for PartitionSettings {
    fn default() -> Self {
        PartitionSettings {
            k_range: vec![2, 3, 4],
            solver: SolveMethod::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSettings {
    pub null_instances: usize,
    pub bootstrap_resamples: usize,
    pub missing_nodes: MissingNodePolicy,
}

impl Default for MetricSettings {
    fn default() -> Self {
        let d = MetricsConfig::default();
        MetricSettings {
            null_instances: d.null.instances,
            bootstrap_resamples: d.bootstrap_resamples,
            missing_nodes: d.missing_nodes,
        }
    }
}

impl MetricSettings {
    pub fn with_seed(&self, seed: u64) -> MetricsConfig {
        let mut cfg = MetricsConfig {
            bootstrap_resamples: self.bootstrap_resamples,
            missing_nodes: self.missing_nodes,
            ..MetricsConfig::default()
        };
        cfg.null.instances = self.null_instances;
        cfg.null.seed = seed;
        cfg
    }
}

/// Everything a run needs. All randomness derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub input: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<InputFormat>,
    /// Not recorded in manifests, so reruns may target another directory.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub edge_rule: EdgeRule,
    #[serde(default)]
    pub partition: PartitionSettings,
    #[serde(default)]
    pub metrics: MetricSettings,
    /// Topic tags to evaluate; every tag present in the data when empty.
    #[serde(default)]
    pub topics: Vec<String>,
    #[serde(default)]
    pub timeline: RollingWindowConfig,
    #[serde(default)]
    pub peaks: PeakConfig,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            seed: 0,
            input: input.into(),
            format: None,
            output_dir: None,
            prior: PriorSpec::default(),
            edge_rule: EdgeRule::default(),
            partition: PartitionSettings::default(),
            metrics: MetricSettings::default(),
            topics: Vec::new(),
            timeline: RollingWindowConfig::default(),
            peaks: PeakConfig::default(),
        }
    }

    /// Parses a TOML config; relative paths are taken relative to the file.
    pub fn from_toml_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.input.is_relative() {
            cfg.input = base.join(&cfg.input);
        }
        // manifests must name the input independently of the working directory
        if let Ok(abs) = fs::canonicalize(&cfg.input) {
            cfg.input = abs;
        }
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(base.join(out));
            }
        }
        Ok(cfg)
    }

    pub fn input_format(&self) -> InteractionFormat {
        self.format
            .map(Into::into)
            .unwrap_or_else(|| InteractionFormat::from_path(&self.input))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let config = |e: String| PipelineError::Config(e);
        self.prior.resolve().validate().map_err(|e| config(e.to_string()))?;
        self.edge_rule.validate().map_err(|e| config(e.to_string()))?;
        self.timeline.validate().map_err(|e| config(e.to_string()))?;
        if self.partition.k_range.is_empty() {
            return Err(config("partition.k_range is empty".into()));
        }
        if let Some(&k) = self.partition.k_range.iter().find(|&&k| k < 2) {
            return Err(config(format!("partition.k_range contains {k}; k must be at least 2")));
        }
        if let SolveMethod::Anneal(a) | SolveMethod::Auto { anneal: a, .. } = &self.partition.solver {
            a.validate().map_err(|e| config(e.to_string()))?;
        }
        if self.metrics.null_instances == 0 {
            return Err(config("metrics.null_instances must be positive".into()));
        }
        if matches!(self.peaks.min_prominence, Some(p) if !(p > 0.0)) {
            return Err(config("peaks.min_prominence must be positive".into()));
        }
        Ok(())
    }
}

/// Seeds of every stochastic stage, derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub master: u64,
    pub partition: u64,
    pub global_metrics: u64,
    pub topics: u64,
    pub timeline: u64,
}

impl StageSeeds {
    pub fn derive(master: u64) -> Self {
        StageSeeds {
            master,
            partition: stage_seed(master, "partition"),
            global_metrics: stage_seed(master, "global_metrics"),
            topics: stage_seed(master, "topics"),
            timeline: stage_seed(master, "timeline"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of a run: enough to repeat it and check the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    pub seeds: StageSeeds,
    pub inputs: Vec<InputDigest>,
    /// sha256 of every other artifact, by file name.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Fails if an input changed since the manifest was written.
    pub fn verify_inputs(&self) -> Result<(), PipelineError> {
        for input in &self.inputs {
            let digest = sha256_file(&input.path).map_err(PipelineError::Ingest)?;
            if digest != input.sha256 {
                return Err(PipelineError::Config(format!(
                    "{} changed since the manifest was written (sha256 {digest}, expected {})",
                    input.path.display(),
                    input.sha256
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[config] {0}")]
    Config(String),
    #[error("[ingest] {0}")]
    Ingest(#[source] IoError),
    #[error("[network] {0}")]
    Network(String),
    #[error("[partition] {0}")]
    Partition(#[source] PartitionerError),
    #[error("[metrics] {0}")]
    Metrics(#[source] MetricError),
    #[error("[timeline] {0}")]
    Timeline(#[source] TimelineError),
    #[error("[write] {0}")]
    Write(#[source] IoError),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Ingest(_) => "ingest",
            PipelineError::Network(_) => "network",
            PipelineError::Partition(_) => "partition",
            PipelineError::Metrics(_) => "metrics",
            PipelineError::Timeline(_) => "timeline",
            PipelineError::Write(_) => "write",
        }
    }

    /// Problems with the inputs or configuration rather than the data's signal.
    pub fn is_user_error(&self) -> bool {
        match self {
            PipelineError::Config(_) | PipelineError::Ingest(_) | PipelineError::Network(_) => true,
            PipelineError::Partition(e) => !matches!(e, PartitionerError::NodeSetMismatch),
            PipelineError::Timeline(TimelineError::InvalidConfig(_)) => true,
            _ => false,
        }
    }

    pub fn is_undefined_metric(&self) -> bool {
        matches!(self, PipelineError::Metrics(MetricError::Undefined { .. }))
    }
}

impl From<InferenceError> for PipelineError {
    fn from(e: InferenceError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

pub fn sha256_file(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(IoError::file(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize)]
struct PartitionSummary<'a> {
    k_star: usize,
    method: Method,
    frustration: usize,
    frustrated_positive: usize,
    frustrated_negative: usize,
    frustration_by_k: BTreeMap<usize, usize>,
    shape_violations: &'a [usize],
}

#[derive(Debug, Clone, Serialize)]
struct MetricsDocument<'a> {
    nodes: usize,
    edges: usize,
    interactions: usize,
    partition: PartitionSummary<'a>,
    /// Alignment of the relation network with its own partition.
    network: &'a MetricsReport,
    /// Alignment of all interactions with the partition.
    interaction_metrics: Option<&'a MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interaction_metrics_error: Option<String>,
}

/// What a completed run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub selection: KSelection,
    pub network_report: MetricsReport,
    pub peaks: Vec<usize>,
    pub warnings: Vec<String>,
}

impl RunSummary {
    /// A headline metric is undefined or every element shares one sign.
    pub fn degenerate(&self) -> bool {
        self.network_report.degenerate
    }
}

struct Artifacts {
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Artifacts {
    fn add(&mut self, name: &'static str, body: Vec<u8>) {
        self.files.push((name, body));
    }

    /// Writes every file, removing the ones already written if any write fails.
    fn commit(&self, dir: &Path) -> Result<(), PipelineError> {
        let write_err = |path: &Path| {
            let path = path.to_path_buf();
            move |e| PipelineError::Write(IoError::File { path, source: e })
        };
        fs::create_dir_all(dir).map_err(write_err(dir))?;
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, body) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(write_err(&path)(e));
            }
            written.push(path);
        }
        Ok(())
    }
}

fn to_buffer(f: impl FnOnce(&mut Vec<u8>) -> Result<(), IoError>) -> Result<Vec<u8>, PipelineError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(PipelineError::Write)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, PipelineError> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Write(IoError::Io(e.into())))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Runs every stage in memory, then writes all artifacts to `output_dir`.
pub fn run_pipeline(config: &PipelineConfig, output_dir: &Path) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let seeds = StageSeeds::derive(config.seed);
    let mut warnings = Vec::new();

    // ingest
    let input_digest = sha256_file(&config.input).map_err(PipelineError::Ingest)?;
    let ingested = io::ingest(&config.input, config.input_format()).map_err(PipelineError::Ingest)?;
    warnings.extend(ingested.warnings.iter().cloned());
    let interactions = ingested.interactions;

    // relation network
    let prior = config.prior.resolve();
    let network = build_relation_network(&interactions, prior, config.edge_rule)?;
    if network.edge_count() == 0 {
        return Err(PipelineError::Network(format!(
            "no user pair passes the edge rule ({} interactions)",
            interactions.len()
        )));
    }

    // partition; fail fast on forced exact runs over the cap
    let mut solver = config.partition.solver.clone();
    match &mut solver {
        SolveMethod::Anneal(a) | SolveMethod::Auto { anneal: a, .. } => a.seed = seeds.partition,
        SolveMethod::Exact(_) => {}
    }
    solver
        .check_size(network.node_count(), &config.partition.k_range)
        .map_err(PipelineError::Partition)?;
    let selection = select_k(&network, &config.partition.k_range, &solver).map_err(PipelineError::Partition)?;
    let best = selection.best();
    let partition = &best.partition;
    let k = partition.k();

    // global metrics
    let global_cfg = config.metrics.with_seed(seeds.global_metrics);
    let network_report = evaluate_network(&network, partition, &global_cfg).map_err(PipelineError::Metrics)?;
    let all = InteractionSubset::whole(interactions.clone());
    let (interaction_report, interaction_error) =
        match evaluate_subset(&all, partition, &global_cfg.reseeded(stage_seed(seeds.global_metrics, "interactions"))) {
            Ok(r) => (Some(r), None),
            Err(e @ MetricError::Undefined { .. }) => {
                warnings.push(format!("interaction metrics: {e}"));
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(PipelineError::Metrics(e)),
        };

    // topics
    let tags: Vec<String> = if config.topics.is_empty() {
        let mut seen: Vec<String> = interactions.iter().flat_map(|it| it.tags.iter().cloned()).collect();
        seen.sort();
        seen.dedup();
        seen
    } else {
        config.topics.clone()
    };
    let mut topic_rows: Vec<(String, usize, Option<MetricsReport>)> = Vec::new();
    if !tags.is_empty() {
        let topics = topic_subsets(&interactions, &tags).map_err(PipelineError::Timeline)?;
        for tag in &topics.empty {
            warnings.push(format!("topic {tag:?} has no interactions"));
        }
        for (i, (tag, subset)) in topics.subsets.iter().enumerate() {
            let cfg = global_cfg.reseeded(crate::seed::derive_seed(seeds.topics, i as u64));
            let report = match evaluate_subset(subset, partition, &cfg) {
                Ok(r) => Some(r),
                Err(e @ MetricError::Undefined { .. }) => {
                    warnings.push(format!("topic {tag:?}: {e}"));
                    None
                }
                Err(e) => return Err(PipelineError::Metrics(e)),
            };
            topic_rows.push((subset.selector().to_string(), subset.len(), report));
        }
    }

    // timeline
    let (points, peaks) = if interactions.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let windows = window_subsets(&interactions, &config.timeline).map_err(PipelineError::Timeline)?;
        let points = metric_timeline(&windows, partition, &config.metrics.with_seed(seeds.timeline));
        let peaks = match detect_peaks(&sai_series(&points), &config.peaks) {
            Ok(p) => p,
            Err(e @ TimelineError::TooFewPoints(_)) => {
                warnings.push(format!("peak detection skipped: {e}"));
                Vec::new()
            }
            Err(e) => return Err(PipelineError::Timeline(e)),
        };
        (points, peaks)
    };

    // artifacts
    let mut artifacts = Artifacts { files: Vec::new() };
    let provenance = NetworkProvenance {
        prior: Some(prior),
        rule: Some(config.edge_rule),
    };
    artifacts.add(NETWORK_FILE, to_buffer(|b| io::write_network(b, &network, &provenance))?);
    artifacts.add(PARTITION_FILE, to_buffer(|b| io::write_partition(b, partition))?);
    let doc = MetricsDocument {
        nodes: network.node_count(),
        edges: network.edge_count(),
        interactions: interactions.len(),
        partition: PartitionSummary {
            k_star: selection.k_star,
            method: best.method,
            frustration: best.frustration,
            frustrated_positive: best.frustrated_positive,
            frustrated_negative: best.frustrated_negative,
            frustration_by_k: selection.solutions.iter().map(|(k, s)| (*k, s.frustration)).collect(),
            shape_violations: &selection.shape_violations,
        },
        network: &network_report,
        interaction_metrics: interaction_report.as_ref(),
        interaction_metrics_error: interaction_error,
    };
    artifacts.add(METRICS_FILE, json_bytes(&doc)?);
    artifacts.add(
        TOPICS_FILE,
        to_buffer(|b| {
            io::write_report_rows(
                b,
                k,
                topic_rows.iter().map(|(s, n, r)| (s.as_str(), *n, r.as_ref())),
            )
        })?,
    );
    artifacts.add(TIMELINE_FILE, to_buffer(|b| io::write_timeline_csv(b, k, &points, &peaks))?);
    let restarts: BTreeMap<usize, Vec<usize>> = selection
        .solutions
        .iter()
        .filter(|(_, s)| s.method == Method::Anneal)
        .map(|(k, s)| (*k, s.restart_best.clone()))
        .collect();
    artifacts.add(RESTARTS_FILE, to_buffer(|b| io::write_restarts_csv(b, &restarts))?);

    let outputs = artifacts
        .files
        .iter()
        .map(|(name, body)| (name.to_string(), hex::encode(Sha256::digest(body))))
        .collect();
    let manifest = Manifest {
        tool: "faultline".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        seeds,
        inputs: vec![InputDigest {
            path: config.input.clone(),
            sha256: input_digest,
        }],
        outputs,
    };
    artifacts.add(MANIFEST_FILE, json_bytes(&manifest)?);
    artifacts.commit(output_dir)?;

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(RunSummary {
        output_dir: output_dir.to_path_buf(),
        manifest,
        selection,
        network_report,
        peaks,
        warnings,
    })
}

/// Repeats the run recorded in a manifest after checking its input digests.
pub fn rerun_manifest(manifest: &Manifest, output_dir: &Path) -> Result<RunSummary, PipelineError> {
    manifest.verify_inputs()?;
    run_pipeline(&manifest.config, output_dir)
}

/// Convenience for tests and the CLI: a buffered file writer.
pub fn create_file(path: &Path) -> Result<BufWriter<fs::File>, IoError> {
    fs::File::create(path).map(BufWriter::new).map_err(IoError::file(path))
}
