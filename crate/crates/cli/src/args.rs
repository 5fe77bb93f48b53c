use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use faultline::inference::{BetaPrior, EdgeRule};
use faultline::io::InteractionFormat;
use faultline::partitioner::{AnnealConfig, ExactConfig, SolveMethod};
use faultline::signed::MissingNodePolicy;
use faultline::timeline::{PeakConfig, RollingWindowConfig};

use crate::{user, CliError};

/// Signed relation networks, balance partitions and polarization metrics.
#[derive(Debug, Parser)]
#[command(name = "faultline", version)]
pub struct Cli {
    /// Worker threads for parallel stages (all cores by default).
    #[arg(long, global = true, env = "FAULTLINE_THREADS")]
    pub threads: Option<usize>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Errors only.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn log_level(&self) -> &'static str {
        if self.quiet {
            return "error";
        }
        match self.verbose {
            0 => "warn",
            1 => "info",
            2 => "debug",
            _ => "trace",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for InteractionFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => InteractionFormat::Csv,
            Format::Jsonl => InteractionFormat::Jsonl,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an interaction file and print a summary.
    IngestCheck {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Infer the signed relation network from interactions.
    BuildNet {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Network file to write (stdout by default).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        edge: EdgeArgs,
    },
    /// Find a minimum-frustration partition of a network file.
    Partition {
        network: PathBuf,
        /// Partition file to write (stdout by default).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the per-restart best frustrations as CSV.
        #[arg(long)]
        restarts_out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Polarization metrics of a network, or of interactions, under a partition.
    Metrics {
        network: PathBuf,
        partition: PathBuf,
        /// Score these interactions instead of the network edges.
        #[arg(long)]
        interactions: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        metrics: MetricArgs,
    },
    /// Metrics per topic tag as CSV.
    Topics {
        interactions: PathBuf,
        partition: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Tags to evaluate (comma separated); all tags in the data by default.
        #[arg(long, value_delimiter = ',')]
        tags: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        metrics: MetricArgs,
    },
    /// Rolling-window metric time series with peak detection.
    Timeline {
        interactions: PathBuf,
        partition: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Restrict to interactions carrying this tag.
        #[arg(long)]
        topic: Option<String>,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        peaks: PeakArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        metrics: MetricArgs,
    },
    /// Generate a planted-partition network (and stream) from a TOML config.
    Synth {
        config: PathBuf,
        #[arg(long, env = "FAULTLINE_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Full pipeline from a TOML config, or a rerun from a manifest.
    Run {
        #[arg(long, conflicts_with = "manifest")]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, env = "FAULTLINE_OUT_DIR")]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PriorArg {
    Uniform,
    SkewedNegative,
}

#[derive(Debug, Args)]
pub struct EdgeArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub prior: PriorArg,
    /// Explicit prior; overrides --prior together with --beta0.
    #[arg(long, requires = "beta0")]
    pub alpha0: Option<f64>,
    #[arg(long, requires = "alpha0")]
    pub beta0: Option<f64>,
    #[arg(long, default_value_t = EdgeRule::default().mean_high)]
    pub mean_high: f64,
    #[arg(long, default_value_t = EdgeRule::default().mean_low)]
    pub mean_low: f64,
    #[arg(long, default_value_t = EdgeRule::default().var_max)]
    pub var_max: f64,
}

impl EdgeArgs {
    pub fn prior(&self) -> Result<BetaPrior, CliError> {
        match (self.alpha0, self.beta0) {
            (Some(a), Some(b)) => BetaPrior::new(a, b).map_err(user),
            _ => Ok(match self.prior {
                PriorArg::Uniform => BetaPrior::uniform(),
                PriorArg::SkewedNegative => BetaPrior::skewed_negative(),
            }),
        }
    }

    pub fn rule(&self) -> EdgeRule {
        EdgeRule {
            mean_high: self.mean_high,
            mean_low: self.mean_low,
            var_max: self.var_max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Anneal,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Candidate group counts (comma separated); the least frustrated wins.
    #[arg(short, long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[arg(long, default_value_t = AnnealConfig::default().restarts)]
    pub restarts: usize,
    /// Largest network the exact search accepts (per-k default otherwise).
    #[arg(long)]
    pub max_exact_nodes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn k_values(&self) -> Vec<usize> {
        self.k.clone()
    }

    pub fn method(&self) -> Result<SolveMethod, CliError> {
        let exact = ExactConfig {
            max_nodes: self.max_exact_nodes,
        };
        let anneal = AnnealConfig {
            restarts: self.restarts,
            seed: self.seed,
            ..AnnealConfig::default()
        };
        anneal.validate().map_err(user)?;
        Ok(match self.method {
            MethodArg::Auto => SolveMethod::Auto { exact, anneal },
            MethodArg::Exact => SolveMethod::Exact(exact),
            MethodArg::Anneal => SolveMethod::Anneal(anneal),
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MissingArg {
    Drop,
    Strict,
}

impl From<MissingArg> for MissingNodePolicy {
    fn from(m: MissingArg) -> Self {
        match m {
            MissingArg::Drop => MissingNodePolicy::Drop,
            MissingArg::Strict => MissingNodePolicy::Strict,
        }
    }
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, default_value_t = 10_000)]
    pub null_instances: usize,
    /// Bootstrap resamples for Cohesiveness/Divisiveness intervals (0 disables).
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap: usize,
    /// Interactions whose users are not in the partition.
    #[arg(long, value_enum, default_value = "drop")]
    pub missing_nodes: MissingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_span(s: &str) -> Result<i64, String> {
    if let Ok(secs) = s.parse::<i64>() {
        return Ok(secs);
    }
    humantime::parse_duration(s)
        .map(|d: Duration| d.as_secs() as i64)
        .map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Window width: seconds or a span such as `10d`.
    #[arg(long, default_value = "10d", value_parser = parse_span)]
    pub width: i64,
    /// Step between window ends.
    #[arg(long, default_value = "5d", value_parser = parse_span)]
    pub step: i64,
}

impl WindowArgs {
    pub fn config(&self) -> Result<RollingWindowConfig, CliError> {
        let cfg = RollingWindowConfig {
            width: self.width,
            step: self.step,
        };
        cfg.validate().map_err(user)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct PeakArgs {
    /// One standard deviation of the SAI series by default.
    #[arg(long)]
    pub min_prominence: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub min_separation: usize,
}

impl PeakArgs {
    pub fn config(&self) -> PeakConfig {
        PeakConfig {
            min_prominence: self.min_prominence,
            min_separation: self.min_separation,
        }
    }
}
