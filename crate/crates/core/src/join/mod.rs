//! Depth-first multi-way join over subgraph lists.

pub mod combine;
pub mod dissect;
pub mod quick_pattern;

use std::borrow::Cow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{LabeledGraph, VertexId};
use crate::matcher::Induce;
use crate::subgraph_list::SubgraphList;

pub use combine::{combine, Combined, JoinedSubgraph, Operand, PruneSets, MAX_JOIN_SIZE};
pub use dissect::{dissect, dissect_counted, Dissection};
pub use quick_pattern::{
    join_patterns, quick_pattern_of, QpDictionary, QuickPattern, QuickPatternTable, Remap,
};

/// Bytes charged per hash-table key lookup.
pub const KEY_BYTES: u64 = std::mem::size_of::<VertexId>() as u64;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum JoinError {
    #[error("a join plan needs at least two lists, got {0}")]
    TooFewLists(usize),
    #[error("list {index} has arity {arity}; only 2 and 3 are supported")]
    Arity { index: usize, arity: usize },
    #[error(
        "lists with arities {arities:?} build {built}-vertex subgraphs, plan targets {target}"
    )]
    ArityMismatch {
        arities: Vec<usize>,
        built: usize,
        target: usize,
    },
    #[error("target size {0} exceeds the supported maximum {MAX_JOIN_SIZE}")]
    TooLarge(usize),
    #[error("lists were built over {got} vertices, graph has {expected}")]
    VertexBound { got: usize, expected: usize },
}

/// Ordered operand lists of a join. List `d + 1` is joined onto the result
/// of the first `d + 1` lists.
#[derive(Debug, Clone)]
pub struct JoinPlan<'a> {
    pub lists: Vec<&'a SubgraphList>,
    pub target_size: usize,
}

impl<'a> JoinPlan<'a> {
    pub fn new(lists: Vec<&'a SubgraphList>, target_size: usize) -> Result<Self, JoinError> {
        let plan = Self { lists, target_size };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), JoinError> {
        if self.lists.len() < 2 {
            return Err(JoinError::TooFewLists(self.lists.len()));
        }
        for (index, l) in self.lists.iter().enumerate() {
            if !(2..=3).contains(&l.arity()) {
                return Err(JoinError::Arity {
                    index,
                    arity: l.arity(),
                });
            }
        }
        let built = self.lists.iter().map(|l| l.arity()).sum::<usize>() + 1 - self.lists.len();
        if built != self.target_size {
            return Err(JoinError::ArityMismatch {
                arities: self.lists.iter().map(|l| l.arity()).collect(),
                built,
                target: self.target_size,
            });
        }
        if self.target_size > MAX_JOIN_SIZE {
            return Err(JoinError::TooLarge(self.target_size));
        }
        Ok(())
    }

    /// Number of join levels (one per list after the first).
    pub fn levels(&self) -> usize {
        self.lists.len() - 1
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JoinOptions<'a> {
    pub induce: Induce,
    pub prune: Option<&'a PruneSets>,
    /// Per-key operand quota `x`: edge-list groups keep `x` entries,
    /// size-3 groups `x * x`.
    pub sample: Option<usize>,
    pub seed: u64,
}

/// Counters for one join run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinStats {
    pub combine_calls: u64,
    pub overlap_rejects: u64,
    pub candidates: u64,
    pub dissection_rejects: u64,
    pub pruned: u64,
    pub outputs: u64,
    pub key_probes: u64,
    /// Key lookups plus bucket entries read, in bytes.
    pub hash_probe_bytes: u64,
    /// Bucket entries iterated after sampling.
    pub sampled_entries: u64,
    /// Bucket entries that would be iterated without sampling.
    pub bucket_entries: u64,
}

impl JoinStats {
    pub fn merge(&mut self, o: &JoinStats) {
        self.combine_calls += o.combine_calls;
        self.overlap_rejects += o.overlap_rejects;
        self.candidates += o.candidates;
        self.dissection_rejects += o.dissection_rejects;
        self.pruned += o.pruned;
        self.outputs += o.outputs;
        self.key_probes += o.key_probes;
        self.hash_probe_bytes += o.hash_probe_bytes;
        self.sampled_entries += o.sampled_entries;
        self.bucket_entries += o.bucket_entries;
    }

    /// Fraction of bucket entries that sampling kept (1 when unsampled).
    pub fn sampled_fraction(&self) -> f64 {
        if self.bucket_entries == 0 {
            1.0
        } else {
            self.sampled_entries as f64 / self.bucket_entries as f64
        }
    }
}

/// Receives every subgraph a join completes.
pub trait JoinSink: Send {
    fn accept(&mut self, sub: &JoinedSubgraph);
}

impl JoinSink for Vec<JoinedSubgraph> {
    fn accept(&mut self, sub: &JoinedSubgraph) {
        self.push(*sub);
    }
}

/// What one worker produced. Quick pattern ids in its sink are local to
/// `dictionary`.
#[derive(Debug)]
pub struct WorkerOutput<S> {
    pub dictionary: QpDictionary,
    pub sink: S,
}

#[derive(Debug)]
pub struct JoinOutput<S> {
    pub stats: JoinStats,
    pub workers: Vec<WorkerOutput<S>>,
}

impl<S> JoinOutput<S> {
    pub fn merge_quick_patterns(&self) -> (QuickPatternTable, Remap) {
        QuickPatternTable::merge(self.workers.iter().map(|w| &w.dictionary))
    }
}

struct Ctx<'a> {
    g: &'a LabeledGraph,
    lists: &'a [&'a SubgraphList],
    opts: JoinOptions<'a>,
}

struct Worker<S> {
    dictionary: QpDictionary,
    sink: S,
    stats: JoinStats,
    buffers: Vec<Vec<Combined>>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Ctx<'_> {
    fn quota(&self, list: &SubgraphList) -> Option<usize> {
        self.opts.sample.map(|x| {
            if list.arity() == 2 {
                x
            } else {
                x.saturating_mul(x)
            }
        })
    }
}

/// Bucket of `key` in column `c` of list `d`, sampled when a quota is set.
/// The sample depends only on the seed, list, column and key, and samples
/// for larger quotas extend those for smaller ones.
fn bucket<'l>(
    ctx: &Ctx<'l>,
    d: usize,
    c: usize,
    key: VertexId,
    stats: &mut JoinStats,
) -> Cow<'l, [u32]> {
    let list = ctx.lists[d];
    let group = list.column(c).group(key);
    stats.key_probes += 1;
    stats.bucket_entries += group.len() as u64;
    let picked: Cow<'l, [u32]> = match ctx.quota(list) {
        Some(q) if group.len() > q => {
            let seed = splitmix(
                ctx.opts.seed ^ splitmix(((d as u64) << 56) ^ ((c as u64) << 48) ^ key as u64),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v = group.to_vec();
            let (picked, _) = v.partial_shuffle(&mut rng, q);
            Cow::Owned(picked.to_vec())
        }
        _ => Cow::Borrowed(group),
    };
    stats.sampled_entries += picked.len() as u64;
    stats.hash_probe_bytes += KEY_BYTES + picked.len() as u64 * list.embedding_bytes() as u64;
    picked
}

fn operand<'l>(list: &'l SubgraphList, e: u32) -> (Operand<'l>, u32) {
    let emb = list.embedding(e as usize);
    (
        Operand {
            vertices: emb.vertices,
            rows: list.patterns()[emb.pattern_idx as usize].rows(),
        },
        emb.pattern_idx,
    )
}

fn extend<S: JoinSink>(ctx: &Ctx<'_>, w: &mut Worker<S>, depth: usize, sub: &JoinedSubgraph) {
    let next = depth + 1;
    if next == ctx.lists.len() {
        w.stats.outputs += 1;
        w.sink.accept(sub);
        return;
    }
    let list = ctx.lists[next];
    let n2 = list.arity();
    let mut buf = std::mem::take(&mut w.buffers[depth]);
    for p in 0..sub.len() {
        let key = sub.vertices()[p];
        for c in list.join_columns() {
            let group = bucket(ctx, next, c, key, &mut w.stats);
            for &e in group.iter() {
                let (t, right) = operand(list, e);
                buf.clear();
                combine(
                    ctx.g,
                    ctx.opts.induce,
                    ctx.opts.prune,
                    &sub.operand(),
                    p,
                    &t,
                    c,
                    &mut buf,
                    &mut w.stats,
                );
                for cand in buf.iter() {
                    let mut out = cand.sub;
                    out.qp = w.dictionary.intern(
                        depth,
                        QuickPattern {
                            left: sub.qp,
                            right,
                            join_pos: (p * n2 + c) as u16,
                            cross: cand.cross,
                        },
                    );
                    extend(ctx, w, next, &out);
                }
            }
        }
    }
    w.buffers[depth] = buf;
}

fn first_level<S: JoinSink>(ctx: &Ctx<'_>, w: &mut Worker<S>, c1: usize, c2: usize, key: VertexId) {
    let (l0, l1) = (ctx.lists[0], ctx.lists[1]);
    let n2 = l1.arity();
    let left = bucket(ctx, 0, c1, key, &mut w.stats);
    let right = bucket(ctx, 1, c2, key, &mut w.stats);
    let mut buf = std::mem::take(&mut w.buffers[0]);
    for &e1 in left.iter() {
        let (s, sp) = operand(l0, e1);
        for &e2 in right.iter() {
            let (t, tp) = operand(l1, e2);
            buf.clear();
            combine(
                ctx.g,
                ctx.opts.induce,
                ctx.opts.prune,
                &s,
                c1,
                &t,
                c2,
                &mut buf,
                &mut w.stats,
            );
            for cand in buf.iter() {
                let mut out = cand.sub;
                out.qp = w.dictionary.intern(
                    0,
                    QuickPattern {
                        left: sp,
                        right: tp,
                        join_pos: (c1 * n2 + c2) as u16,
                        cross: cand.cross,
                    },
                );
                extend(ctx, w, 1, &out);
            }
        }
    }
    w.buffers[0] = buf;
}

/// Runs the join in the current rayon pool. Work is split by
/// `(first-list column, second-list column, shared vertex)`; every worker
/// owns a sink built by `make_sink` and a quick pattern dictionary.
pub fn multiway_join<S, F>(
    g: &LabeledGraph,
    plan: &JoinPlan<'_>,
    opts: &JoinOptions<'_>,
    make_sink: F,
) -> Result<JoinOutput<S>, JoinError>
where
    S: JoinSink,
    F: Fn() -> S + Sync + Send,
{
    plan.validate()?;
    for l in &plan.lists {
        if l.vertex_bound() > g.vertex_count() {
            return Err(JoinError::VertexBound {
                got: l.vertex_bound(),
                expected: g.vertex_count(),
            });
        }
    }
    let ctx = Ctx {
        g,
        lists: &plan.lists,
        opts: *opts,
    };
    let (l0, l1) = (plan.lists[0], plan.lists[1]);
    let mut stats = JoinStats::default();
    let mut tasks: Vec<(u8, u8, VertexId)> = Vec::new();
    for c1 in l0.join_columns() {
        for c2 in l1.join_columns() {
            let (a, b) = (l0.column(c1), l1.column(c2));
            let (probe, other) = if a.keys().len() <= b.keys().len() {
                (a, b)
            } else {
                (b, a)
            };
            for &key in probe.keys() {
                stats.key_probes += 1;
                stats.hash_probe_bytes += KEY_BYTES;
                if !other.group(key).is_empty() {
                    tasks.push((c1 as u8, c2 as u8, key));
                }
            }
        }
    }
    let levels = plan.levels();
    let workers: Vec<Worker<S>> = tasks
        .par_iter()
        .fold(
            || Worker {
                dictionary: QpDictionary::new(levels),
                sink: make_sink(),
                stats: JoinStats::default(),
                buffers: vec![Vec::new(); levels],
            },
            |mut w, &(c1, c2, key)| {
                first_level(&ctx, &mut w, c1 as usize, c2 as usize, key);
                w
            },
        )
        .collect();
    let mut out = Vec::with_capacity(workers.len());
    for w in workers {
        stats.merge(&w.stats);
        out.push(WorkerOutput {
            dictionary: w.dictionary,
            sink: w.sink,
        });
    }
    Ok(JoinOutput {
        stats,
        workers: out,
    })
}
