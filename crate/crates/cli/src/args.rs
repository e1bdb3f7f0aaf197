use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gresnet::model::{ModelConfig, ResidualKind};
use gresnet::spectral::OperatorKind;

#[derive(Parser, Debug)]
#[command(
    name = "gresnet",
    version,
    about = "Graph residual networks and suspended-animation analysis",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one model and emit its report.
    Train(TrainArgs),
    /// Train every (depth, residual, seed) cell and emit per-epoch curves.
    Sweep(SweepArgs),
    /// Spectrum, closed-form bounds and empirical depth limit of a graph.
    Limit(LimitArgs),
    /// Spectrum and closed-form depth bounds only.
    Bound(BoundArgs),
    /// Train while sampling layer-to-layer gradient norm ratios.
    Probe(ProbeArgs),
    /// Degree- and feature-based representation distances between node pairs.
    Distance(DistanceArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// cora, citeseer, pubmed, synthetic, or edgelist:<path>.
    #[arg(long, default_value = "cora")]
    pub dataset: DatasetSpec,
    #[arg(long, env = "GRESNET_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Restrict to the largest connected component.
    #[arg(long)]
    pub largest_component: bool,
    /// Directory with train.idx, val.idx and test.idx replacing the default split.
    #[arg(long)]
    pub split_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Named(String),
    Synthetic,
    EdgeList(PathBuf),
}

impl FromStr for DatasetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cora" | "citeseer" | "pubmed" => Ok(DatasetSpec::Named(s.to_owned())),
            "synthetic" => Ok(DatasetSpec::Synthetic),
            _ => match s.strip_prefix("edgelist:") {
                Some(p) if !p.is_empty() => Ok(DatasetSpec::EdgeList(PathBuf::from(p))),
                _ => Err(format!(
                    "unknown dataset {s:?}; expected cora, citeseer, pubmed, synthetic or edgelist:<path>"
                )),
            },
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Hidden plus output layers.
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long)]
    pub bias: bool,
    #[arg(long, default_value_t = 0.5)]
    pub dropout: f64,
    /// Also drop out the residual branch.
    #[arg(long)]
    pub dropout_residual: bool,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    /// Apply weight decay to every weight matrix, not just the first layer.
    #[arg(long)]
    pub decay_all_layers: bool,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Early-stopping patience on validation loss; 0 disables.
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
}

impl ModelArgs {
    pub fn config(&self, layers: usize, residual: ResidualKind, seed: u64) -> ModelConfig {
        ModelConfig {
            layers,
            hidden: self.hidden,
            residual,
            bias: self.bias,
            dropout: self.dropout,
            learning_rate: self.lr,
            weight_decay: self.weight_decay,
            decay_all_layers: self.decay_all_layers,
            epochs: self.epochs,
            seed,
            patience: self.patience,
            dropout_residual: self.dropout_residual,
            probe_every: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "none", value_parser = parse_residual)]
    pub residual: ResidualKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the trained parameters here.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
    /// json: full report; csv: the per-epoch curve in sweep layout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7")]
    pub depths: Vec<usize>,
    /// Comma-separated residual kinds.
    #[arg(long, value_delimiter = ',', default_value = "none", value_parser = parse_residual)]
    pub residual: Vec<ResidualKind>,
    /// Comma-separated seeds; overrides --repetitions.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Seeds 0..N when --seeds is absent.
    #[arg(long, default_value_t = 10)]
    pub repetitions: u64,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Per-cell summary (mean best-validation test accuracy etc.) as CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Operator::Normalized)]
    pub operator: Operator,
    /// Add self-loops to the random walk (the symmetric operators always have them).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub self_loops: bool,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    #[command(flatten)]
    pub spectral: SpectralArgs,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Seeds the node sample used as probe columns on graphs above 512 nodes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub spectral: SpectralArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    Normalized,
    RandomWalk,
    Lazy,
}

impl From<Operator> for OperatorKind {
    fn from(o: Operator) -> Self {
        match o {
            Operator::Normalized => OperatorKind::Normalized,
            Operator::RandomWalk => OperatorKind::RandomWalk,
            Operator::Lazy => OperatorKind::Lazy,
        }
    }
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "none", value_parser = parse_residual)]
    pub residual: ResidualKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample the gradient norms every this many epochs.
    #[arg(long, default_value_t = 10)]
    pub probe_every: usize,
    /// Further residual kinds trained only for the summary.
    #[arg(long, value_delimiter = ',', value_parser = parse_residual)]
    pub compare: Vec<ResidualKind>,
    /// Summary of the δ̂ distributions per residual kind, as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Probe a chain of identity maps of depth --layers instead of training.
    #[arg(long)]
    pub identity_chain: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of sampled node pairs, or `all`.
    #[arg(long, default_value = "1000")]
    pub pairs: Pairs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Feature dimension d_x scaling the degree distance; defaults to the
    /// dataset's (the node count for an edge list, whose features are one-hot).
    #[arg(long)]
    pub dx: Option<usize>,
    /// Also write the degree histogram here.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairs {
    All,
    Sample(usize),
}

impl FromStr for Pairs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(Pairs::All);
        }
        s.parse()
            .map(Pairs::Sample)
            .map_err(|_| format!("expected a pair count or `all`, got {s:?}"))
    }
}

pub fn parse_residual(s: &str) -> Result<ResidualKind, String> {
    s.parse()
}
