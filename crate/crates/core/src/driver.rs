//! End-to-end mining pipeline, run configuration and reports.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::canonical::{CanonicalCode, PatternError, TieBreak};
use crate::graph::{load_graph, GraphError, LabelSource, LabeledGraph};
use crate::join::{
    multiway_join, JoinError, JoinOptions, JoinPlan, JoinStats, PruneSets, MAX_JOIN_SIZE,
};
use crate::matcher::{
    build_edge_list, enumerate_size3, label_pair, Induce, Size3Key, Size3Options,
};
use crate::subgraph_list::{ListError, SubgraphList};
use crate::support::{
    aggregate_edge_lists, aggregate_list, aggregate_quick_patterns, filter_frequent,
    EdgeListGroups, PatternStats, QpGroups, SupportThreshold,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExplorationMode {
    /// Joins of size-3 subgraphs (plus one edge list for even sizes).
    #[default]
    TwoVertex,
    /// Joins of edge lists only; no pruning.
    SingleVertex,
}

/// How join outputs are grouped before canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuickPatternMode {
    /// By join history.
    #[default]
    Index,
    /// By labels and edges in vertex-id order.
    EdgeList,
}

#[derive(Debug, thiserror::Error)]
pub enum MineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Join(#[from] JoinError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("cache file {path}: {source}")]
    Cache {
        path: PathBuf,
        #[source]
        source: CacheError,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    List(#[from] ListError),
}

/// In-memory mining parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MineOptions {
    pub size: usize,
    pub threshold: SupportThreshold,
    pub mode: ExplorationMode,
    pub induce: Induce,
    /// Drop join candidates containing infrequent size-2/3 subpatterns.
    pub prune: bool,
    /// Size-3 embeddings kept per center vertex.
    pub match_sample: Option<usize>,
    /// Per-key join quota.
    pub join_sample: Option<usize>,
    pub seed: u64,
    pub quick_patterns: QuickPatternMode,
    pub tie: TieBreak,
    /// Check that all members of a quick pattern group share one pattern.
    pub verify_quick_patterns: bool,
    pub threads: Option<usize>,
    /// Directory for binary size-3 list caches.
    pub cache_dir: Option<PathBuf>,
}

impl MineOptions {
    /// Defaults for `mode`: pruning on for two-vertex, off for single-vertex.
    pub fn new(size: usize, threshold: SupportThreshold, mode: ExplorationMode) -> Self {
        Self {
            size,
            threshold,
            mode,
            induce: Induce::Edge,
            prune: mode == ExplorationMode::TwoVertex,
            match_sample: None,
            join_sample: None,
            seed: 0,
            quick_patterns: QuickPatternMode::Index,
            tie: TieBreak::First,
            verify_quick_patterns: false,
            threads: None,
            cache_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), MineError> {
        let bad = |m: &str| Err(MineError::Config(m.to_string()));
        if self.size < 2 {
            return bad("pattern size must be at least 2");
        }
        if self.size > MAX_JOIN_SIZE {
            return Err(MineError::Config(format!(
                "pattern size must be at most {MAX_JOIN_SIZE}"
            )));
        }
        match self.threshold {
            SupportThreshold::Absolute(0) => return bad("support threshold must be positive"),
            SupportThreshold::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return bad("support fraction must be in (0, 1]")
            }
            _ => {}
        }
        if self.mode == ExplorationMode::SingleVertex {
            if self.prune {
                return bad("single-vertex exploration does not support pruning");
            }
            if self.match_sample.is_some() {
                return bad("match sampling applies to size-3 lists, unused in single-vertex mode");
            }
        }
        if self.match_sample == Some(0) || self.join_sample == Some(0) {
            return bad("sample quotas must be positive");
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive");
        }
        Ok(())
    }
}

/// Deterministic counters of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub hash_probe_bytes: u64,
    pub canonicalization_calls: u64,
    /// Of which spent grouping join outputs.
    pub join_canonicalization_calls: u64,
    pub combine_calls: u64,
    pub outputs: u64,
    pub pruned_count: u64,
    pub quick_pattern_groups: u64,
    pub sampled_fraction: f64,
    pub edge_embeddings: u64,
    pub size3_embeddings: u64,
    pub frequent_edge_patterns: u64,
    pub frequent_size3_patterns: u64,
    pub quick_pattern_mismatches: u64,
    pub join: JoinStats,
}

/// Wall-clock phase times in seconds. Matching is kept apart from the join.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub matching: f64,
    pub filtering: f64,
    pub join: f64,
    pub aggregation: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MineResult {
    pub size: usize,
    /// Resolved absolute threshold.
    pub threshold: usize,
    /// Frequent size-`size` patterns by support descending, then code.
    pub patterns: Vec<PatternStats>,
    pub counters: Counters,
    pub timings: Timings,
}

fn size3_key(list: &SubgraphList, idx: usize) -> Size3Key {
    let p = &list.patterns()[idx];
    let l = p.labels();
    if p.edge_count() == 3 {
        Size3Key::triangle(l[0], l[1], l[2])
    } else {
        Size3Key::wedge(l[0], l[1], l[2])
    }
}

/// Keeps only embeddings of frequent patterns. Returns the frequent stats
/// and which pattern indices survived.
fn filter_list(
    list: &mut SubgraphList,
    threshold: usize,
    tie: TieBreak,
    counters: &mut Counters,
) -> Result<(Vec<PatternStats>, Vec<bool>), PatternError> {
    let (agg, codes) = aggregate_list(list, tie)?;
    counters.canonicalization_calls += agg.canonicalizations;
    let frequent = filter_frequent(agg.finish()?, threshold);
    let keep_codes: FxHashSet<&CanonicalCode> = frequent.iter().map(|p| &p.code).collect();
    let keep: Vec<bool> = codes.iter().map(|c| keep_codes.contains(c)).collect();
    list.retain_patterns(|idx| keep[idx as usize]);
    Ok((frequent, keep))
}

fn graph_fingerprint(g: &LabeledGraph) -> u64 {
    // FNV-1a over the canonical text forms
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in g
        .to_edge_list_text()
        .bytes()
        .chain(g.to_label_text().bytes())
    {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn size3_list(
    g: &LabeledGraph,
    opts: &MineOptions,
    s3: &Size3Options,
) -> Result<SubgraphList, MineError> {
    let Some(dir) = &opts.cache_dir else {
        return Ok(enumerate_size3(g, s3));
    };
    let name = format!(
        "size3-{:016x}-{}-{}-{}.fsl",
        graph_fingerprint(g),
        match s3.induce {
            Induce::Edge => "edge",
            Induce::Vertex => "vertex",
        },
        s3.sample_per_vertex
            .map_or("all".to_string(), |t| t.to_string()),
        s3.seed
    );
    let path = dir.join(name);
    let cache_err = |source: CacheError| MineError::Cache {
        path: path.clone(),
        source,
    };
    if path.exists() {
        let bytes = fs::read(&path).map_err(|e| cache_err(e.into()))?;
        let list = SubgraphList::decode_bounded(&bytes, g.vertex_count())
            .map_err(|e| cache_err(e.into()))?;
        list.validate_against(g).map_err(|e| cache_err(e.into()))?;
        return Ok(list);
    }
    let list = enumerate_size3(g, s3);
    fs::create_dir_all(dir).map_err(|e| cache_err(e.into()))?;
    fs::write(&path, list.encode()).map_err(|e| cache_err(e.into()))?;
    Ok(list)
}

fn sort_report(patterns: &mut [PatternStats]) {
    patterns.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.code.cmp(&b.code)));
}

/// Mines all frequent connected patterns with `opts.size` vertices.
pub fn mine(g: &LabeledGraph, opts: &MineOptions) -> Result<MineResult, MineError> {
    opts.validate()?;
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| mine_in_pool(g, opts)),
        None => mine_in_pool(g, opts),
    }
}

fn mine_in_pool(g: &LabeledGraph, opts: &MineOptions) -> Result<MineResult, MineError> {
    let start = Instant::now();
    let s = opts.size;
    let threshold = opts.threshold.resolve(g.vertex_count());
    let mut counters = Counters::default();
    let mut timings = Timings::default();
    let finish = |mut patterns: Vec<PatternStats>, counters: Counters, mut timings: Timings| {
        sort_report(&mut patterns);
        timings.total = start.elapsed().as_secs_f64();
        Ok(MineResult {
            size: s,
            threshold,
            patterns,
            counters,
            timings,
        })
    };

    let t = Instant::now();
    let mut edges = build_edge_list(g);
    let mut size3 = if opts.mode == ExplorationMode::TwoVertex && s >= 3 {
        let s3 = Size3Options {
            sample_per_vertex: opts.match_sample,
            seed: opts.seed,
            induce: opts.induce,
        };
        Some(size3_list(g, opts, &s3)?)
    } else {
        None
    };
    timings.matching = t.elapsed().as_secs_f64();
    counters.edge_embeddings = edges.len() as u64;
    counters.size3_embeddings = size3.as_ref().map_or(0, |l| l.len() as u64);

    let t = Instant::now();
    let (frequent_edges, edge_keep) = filter_list(&mut edges, threshold, opts.tie, &mut counters)?;
    counters.frequent_edge_patterns = frequent_edges.len() as u64;
    let mut prune = PruneSets::default();
    for (idx, p) in edges.patterns().iter().enumerate() {
        if edge_keep[idx] {
            prune
                .frequent2
                .insert(label_pair(p.labels()[0], p.labels()[1]));
        }
    }
    let mut frequent3 = Vec::new();
    if let Some(list) = &mut size3 {
        let (freq, keep) = filter_list(list, threshold, opts.tie, &mut counters)?;
        counters.frequent_size3_patterns = freq.len() as u64;
        for (idx, &k) in keep.iter().enumerate() {
            if k {
                prune.frequent3.insert(size3_key(list, idx));
            }
        }
        frequent3 = freq;
    }
    timings.filtering = t.elapsed().as_secs_f64();

    if s == 2 {
        return finish(frequent_edges, counters, timings);
    }
    if s == 3 && opts.mode == ExplorationMode::TwoVertex {
        return finish(frequent3, counters, timings);
    }

    let lists: Vec<&SubgraphList> = match opts.mode {
        ExplorationMode::TwoVertex => {
            let s3 = size3.as_ref().expect("built for s >= 3");
            let n = s / 2;
            if s % 2 == 1 {
                vec![s3; n]
            } else {
                let mut l = vec![&edges];
                l.extend(std::iter::repeat_n(s3, n - 1));
                l
            }
        }
        ExplorationMode::SingleVertex => vec![&edges; s - 1],
    };
    let plan = JoinPlan::new(lists, s)?;
    let join_opts = JoinOptions {
        induce: opts.induce,
        prune: opts.prune.then_some(&prune),
        sample: opts.join_sample,
        seed: opts.seed,
    };

    let t = Instant::now();
    let (agg, groups, mismatches, stats) = match opts.quick_patterns {
        QuickPatternMode::Index => {
            let out = multiway_join(g, &plan, &join_opts, || {
                QpGroups::new(g, opts.verify_quick_patterns)
            })?;
            timings.join = t.elapsed().as_secs_f64();
            let stats = out.stats;
            let t = Instant::now();
            let (agg, groups, mismatches) = aggregate_quick_patterns(out, &plan.lists, opts.tie)?;
            timings.aggregation = t.elapsed().as_secs_f64();
            (agg, groups, mismatches, stats)
        }
        QuickPatternMode::EdgeList => {
            let out = multiway_join(g, &plan, &join_opts, || EdgeListGroups::new(g))?;
            timings.join = t.elapsed().as_secs_f64();
            let stats = out.stats;
            let t = Instant::now();
            let (agg, groups) = aggregate_edge_lists(out, opts.tie)?;
            timings.aggregation = t.elapsed().as_secs_f64();
            (agg, groups, 0, stats)
        }
    };
    counters.join_canonicalization_calls = agg.canonicalizations;
    counters.canonicalization_calls += agg.canonicalizations;
    counters.quick_pattern_groups = groups as u64;
    counters.quick_pattern_mismatches = mismatches;
    counters.hash_probe_bytes = stats.hash_probe_bytes;
    counters.combine_calls = stats.combine_calls;
    counters.outputs = stats.outputs;
    counters.pruned_count = stats.pruned;
    counters.sampled_fraction = stats.sampled_fraction();
    counters.join = stats;
    let patterns = filter_frequent(agg.finish()?, threshold);
    finish(patterns, counters, timings)
}

/// Report encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRow {
    pub canonical: String,
    pub size: usize,
    pub support: usize,
    pub embeddings: u64,
}

/// File-facing run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub graph: PathBuf,
    pub labels: LabelSource,
    pub options: MineOptions,
    pub out: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub format: ReportFormat,
}

/// The pattern table plus everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub size: usize,
    pub threshold: usize,
    pub mode: ExplorationMode,
    pub induce: Induce,
    pub seed: u64,
    pub match_sample: Option<usize>,
    pub join_sample: Option<usize>,
    pub patterns: Vec<PatternRow>,
}

/// Counters and timings; timings make this file run-dependent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub vertices: usize,
    pub edges: usize,
    pub counters: Counters,
    pub timings: Timings,
}

impl RunReport {
    pub fn new(opts: &MineOptions, result: &MineResult) -> Self {
        Self {
            size: result.size,
            threshold: result.threshold,
            mode: opts.mode,
            induce: opts.induce,
            seed: opts.seed,
            match_sample: opts.match_sample,
            join_sample: opts.join_sample,
            patterns: result
                .patterns
                .iter()
                .map(|p| PatternRow {
                    canonical: p.code.to_hex(),
                    size: p.code.size(),
                    support: p.support,
                    embeddings: p.embeddings,
                })
                .collect(),
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            ReportFormat::Text => {
                let mut s = String::new();
                let sample = |x: Option<usize>| x.map_or("none".to_string(), |v| v.to_string());
                let _ = writeln!(
                    s,
                    "# size={} threshold={} mode={} induce={} seed={} match_sample={} join_sample={}",
                    self.size,
                    self.threshold,
                    match self.mode {
                        ExplorationMode::TwoVertex => "two-vertex",
                        ExplorationMode::SingleVertex => "single-vertex",
                    },
                    match self.induce {
                        Induce::Edge => "edge",
                        Induce::Vertex => "vertex",
                    },
                    self.seed,
                    sample(self.match_sample),
                    sample(self.join_sample),
                );
                let _ = writeln!(s, "support\tsize\tembeddings\tcanonical");
                for p in &self.patterns {
                    let _ = writeln!(
                        s,
                        "{}\t{}\t{}\t{}",
                        p.support, p.size, p.embeddings, p.canonical
                    );
                }
                s
            }
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), MineError> {
    fs::write(path, contents).map_err(|source| MineError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the pattern table (and stats, when a path is given). Without an
/// output path the table goes to stdout.
pub fn emit_report(
    report: &RunReport,
    stats: &RunStats,
    format: ReportFormat,
    out: Option<&Path>,
    stats_path: Option<&Path>,
) -> Result<(), MineError> {
    let table = report.render(format);
    match out {
        Some(p) => write_file(p, &table)?,
        None => print!("{table}"),
    }
    if let Some(p) = stats_path {
        let mut s = serde_json::to_string_pretty(stats).expect("stats serialize");
        s.push('\n');
        write_file(p, &s)?;
    }
    Ok(())
}

/// Loads the graph, mines and writes the outputs.
pub fn run_fsm(config: &RunConfig) -> Result<(RunReport, RunStats), MineError> {
    config.options.validate()?;
    let g = load_graph(&config.graph, &config.labels)?;
    let result = mine(&g, &config.options)?;
    let report = RunReport::new(&config.options, &result);
    let stats = RunStats {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        counters: result.counters,
        timings: result.timings,
    };
    emit_report(
        &report,
        &stats,
        config.format,
        config.out.as_deref(),
        config.stats.as_deref(),
    )?;
    Ok((report, stats))
}
