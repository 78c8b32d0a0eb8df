//! `fsm`: frequent subgraph mining over a labeled edge list.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use fsm_core::{
    run_fsm, ExplorationMode, Induce, LabelSource, MineOptions, QuickPatternMode, ReportFormat,
    RunConfig, SupportThreshold, TieBreak,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    TwoVertex,
    SingleVertex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InduceArg {
    Edge,
    Vertex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuickPatterns {
    Index,
    EdgeList,
}

#[derive(Debug, Parser)]
#[command(
    name = "fsm",
    version,
    about = "Frequent subgraph mining with MNI support"
)]
struct Args {
    /// Edge list, one `u v` pair per line; `#` starts a comment.
    #[arg(long)]
    graph: PathBuf,
    /// Label file with `v label` lines.
    #[arg(long, conflicts_with = "random_labels")]
    labels: Option<PathBuf>,
    /// Draw labels uniformly from `[0, N)`.
    #[arg(long, value_name = "N")]
    random_labels: Option<u32>,
    /// Seed for `--random-labels`.
    #[arg(
        long,
        value_name = "S",
        default_value_t = 0,
        requires = "random_labels"
    )]
    label_seed: u64,
    /// Pattern size in vertices.
    #[arg(long)]
    size: usize,
    /// Absolute count, or a fraction of |V| as `0.1%` or `n*0.001`.
    #[arg(long)]
    support: SupportThreshold,
    #[arg(long, value_enum, default_value_t = Mode::TwoVertex)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = InduceArg::Edge)]
    induce: InduceArg,
    /// Keep at most this many size-3 subgraphs per center vertex.
    #[arg(long, value_name = "T")]
    match_sample: Option<usize>,
    /// Keep at most this many entries (squared for size-3 lists) per probed bucket.
    #[arg(long, value_name = "X")]
    join_sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Pattern table path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Counters and timings as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Disable anti-monotone pruning inside the join.
    #[arg(long)]
    no_prune: bool,
    /// How join outputs are grouped before canonicalization.
    #[arg(long, value_enum, default_value_t = QuickPatterns::Index)]
    quick_pattern: QuickPatterns,
    /// Directory for cached size-3 lists.
    #[arg(long, value_name = "DIR")]
    cache: Option<PathBuf>,
}

impl Args {
    fn config(self) -> Result<RunConfig> {
        let labels = match (self.labels, self.random_labels) {
            (Some(p), _) => LabelSource::File(p),
            (None, Some(0)) => bail!("--random-labels needs at least one label"),
            (None, Some(count)) => LabelSource::Random {
                count,
                seed: self.label_seed,
            },
            (None, None) => LabelSource::Uniform,
        };
        let mode = match self.mode {
            Mode::TwoVertex => ExplorationMode::TwoVertex,
            Mode::SingleVertex => ExplorationMode::SingleVertex,
        };
        let mut options = MineOptions::new(self.size, self.support, mode);
        options.induce = match self.induce {
            InduceArg::Edge => Induce::Edge,
            InduceArg::Vertex => Induce::Vertex,
        };
        options.prune = options.prune && !self.no_prune;
        options.match_sample = self.match_sample;
        options.join_sample = self.join_sample;
        options.seed = self.seed;
        options.threads = self.threads;
        options.quick_patterns = match self.quick_pattern {
            QuickPatterns::Index => QuickPatternMode::Index,
            QuickPatterns::EdgeList => QuickPatternMode::EdgeList,
        };
        options.tie = TieBreak::First;
        options.cache_dir = self.cache;
        Ok(RunConfig {
            graph: self.graph,
            labels,
            options,
            out: self.out,
            stats: self.stats,
            format: match self.format {
                Format::Text => ReportFormat::Text,
                Format::Json => ReportFormat::Json,
            },
        })
    }
}

fn run() -> Result<()> {
    let config = Args::parse().config()?;
    run_fsm(&config).with_context(|| format!("mining {}", config.graph.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsm: {e:#}");
            ExitCode::FAILURE
        }
    }
}
