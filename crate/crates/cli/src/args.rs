use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gpool::select::{SelectorConfig, SelectorKind};
use gpool::timing::BenchMode;
use gpool::{Connector, Pooler, Reduce};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "gpool", version, about = "Hierarchical graph pooling toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic graphs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Pool a graph once and write the coarsened graph plus a cache record.
    Coarsen(CoarsenArgs),
    /// Cluster a graph by optimizing pooling objectives directly.
    Cluster(ClusterArgs),
    /// Time direct, cached and pre-coarsened pooling over a dataset.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Stochastic block model with class-shifted Gaussian features.
    Sbm(SbmArgs),
}

#[derive(Debug, Args)]
pub struct SbmArgs {
    #[arg(long, default_value_t = 400)]
    pub nodes: usize,
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.3)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    pub p_out: f64,
    #[arg(long, default_value_t = 2)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 3.0)]
    pub feature_shift: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of graphs; with more than one, `--out` is a directory and
    /// graph `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectArg {
    Sparse,
    Kron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceArg {
    Sum,
    Mean,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Direct,
    Cached,
    Precoarsen,
}

impl From<ModeArg> for BenchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => Self::Direct,
            ModeArg::Cached => Self::Cached,
            ModeArg::Precoarsen => Self::Precoarsen,
        }
    }
}

/// Selector and connector flags shared by `coarsen` and `bench`.
#[derive(Debug, Args)]
pub struct PoolerArgs {
    /// ndp, graclus, kmis, nmf or topk.
    #[arg(long)]
    pub pooler: String,
    #[arg(long, value_enum, default_value_t = ConnectArg::Sparse)]
    pub connect: ConnectArg,
    /// Kept fraction for topk.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Hop radius for kmis.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Number of factors for nmf.
    #[arg(long, default_value_t = 2)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub nmf_max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub nmf_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eig_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub eig_max_iters: usize,
    /// Visit vertices in a seeded random order in graclus.
    #[arg(long)]
    pub graclus_shuffle: bool,
    /// Drop Kron edges lighter than this.
    #[arg(long, default_value_t = gpool::rcl::DEFAULT_SPARSIFY_EPS)]
    pub sparsify_eps: f64,
    /// Remove self-loops from the sparse connector output.
    #[arg(long)]
    pub no_self_loops: bool,
    #[arg(long, value_enum, default_value_t = ReduceArg::Mean)]
    pub reduce: ReduceArg,
    /// Add the missing reverse of every edge before pooling.
    #[arg(long)]
    pub symmetrize: bool,
}

impl PoolerArgs {
    pub fn build(&self) -> CliResult<Pooler> {
        let kind: SelectorKind = self
            .pooler
            .parse()
            .map_err(|_| CliError::Usage(format!("unknown pooler `{}`", self.pooler)))?;
        let selector = SelectorConfig {
            kind,
            ratio: self.ratio,
            k: self.k,
            num_clusters: self.clusters,
            nmf_max_iters: self.nmf_max_iters,
            nmf_tol: self.nmf_tol,
            eig_tol: self.eig_tol,
            eig_max_iters: self.eig_max_iters,
            seed: self.seed,
            graclus_shuffle: self.graclus_shuffle,
        };
        selector.validate()?;
        let connector = match self.connect {
            ConnectArg::Sparse => Connector::Sparse {
                remove_self_loops: self.no_self_loops,
            },
            ConnectArg::Kron => Connector::Kron {
                sparsify_eps: self.sparsify_eps,
            },
        };
        let mut pooler = Pooler::new(selector, connector)?;
        pooler.reduce = match self.reduce {
            ReduceArg::Sum => Reduce::Sum,
            ReduceArg::Mean => Reduce::Mean,
            ReduceArg::Max => Reduce::Max,
        };
        Ok(pooler)
    }
}

#[derive(Debug, Args)]
pub struct CoarsenArgs {
    #[command(flatten)]
    pub pooler: PoolerArgs,
    #[arg(long)]
    pub input: PathBuf,
    /// Pooled graph file.
    #[arg(long)]
    pub output: PathBuf,
    /// Cache record file; defaults to the output path with a `.tgpc`
    /// extension.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Comma list of `loss[:weight]`, e.g. `mincut-cut,mincut-ortho`.
    #[arg(long)]
    pub objective: String,
    /// Number of clusters, at least 2.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 5e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 500)]
    pub patience: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Feature propagation steps of the initialization.
    #[arg(long, default_value_t = 2)]
    pub smoothing: usize,
    #[arg(long, default_value_t = gpool::objectives::DEFAULT_HOSC_ALPHA)]
    pub hosc_alpha: f64,
    #[arg(long)]
    pub input: PathBuf,
    /// Ground-truth labels, one integer per line. Overrides labels stored
    /// in the graph file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Fail unless ground-truth labels are available for evaluation.
    #[arg(long)]
    pub metrics: bool,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Add the missing reverse of every edge before clustering.
    #[arg(long)]
    pub symmetrize: bool,
    /// Write predicted labels, one per line.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub pooler: PoolerArgs,
    /// Modes to time; direct always runs as the baseline.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "direct,precoarsen")]
    pub mode: Vec<ModeArg>,
    /// Directory of graph files (`*.txt` or `*.graph`), read in name order.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = gpool::timing::MIN_REPEAT)]
    pub repeat: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Worker threads for pre-coarsening.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Also write the timings as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
