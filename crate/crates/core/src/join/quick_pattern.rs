//! Quick patterns: join-history ids that group subgraphs of one pattern
//! without canonicalizing each of them.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;

use crate::canonical::PatternGraph;
use crate::graph::VertexId;
use crate::subgraph_list::SubgraphList;

/// One join step: the left operand's pattern (list pattern index at the
/// first level, quick pattern id of the previous level after that), the
/// right operand's list pattern index, the join position `i * |t| + j` and
/// the cross-edge bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuickPattern {
    pub left: u32,
    pub right: u32,
    pub join_pos: u16,
    pub cross: u64,
}

/// Per-worker interning of quick patterns, one table per join level.
#[derive(Debug, Clone, Default)]
pub struct QpDictionary {
    levels: Vec<(FxHashMap<QuickPattern, u32>, Vec<QuickPattern>)>,
}

impl QpDictionary {
    pub fn new(levels: usize) -> Self {
        Self {
            levels: (0..levels).map(|_| Default::default()).collect(),
        }
    }

    #[inline]
    pub fn intern(&mut self, level: usize, qp: QuickPattern) -> u32 {
        let (map, list) = &mut self.levels[level];
        *map.entry(qp).or_insert_with(|| {
            list.push(qp);
            (list.len() - 1) as u32
        })
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Tuples at `level`, indexed by local id.
    pub fn tuples(&self, level: usize) -> &[QuickPattern] {
        &self.levels[level].1
    }
}

/// Merged quick patterns with dense ids in sorted tuple order, so ids do not
/// depend on scheduling.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuickPatternTable {
    levels: Vec<Vec<QuickPattern>>,
}

/// `remap[worker][level][local id]` is the global id.
pub type Remap = Vec<Vec<Vec<u32>>>;

impl QuickPatternTable {
    pub fn merge<'a>(dicts: impl IntoIterator<Item = &'a QpDictionary>) -> (Self, Remap) {
        let dicts: Vec<&QpDictionary> = dicts.into_iter().collect();
        let levels = dicts.iter().map(|d| d.levels()).max().unwrap_or(0);
        let mut remap: Remap = vec![Vec::new(); dicts.len()];
        let mut table = Vec::with_capacity(levels);
        for level in 0..levels {
            let translated: Vec<Vec<QuickPattern>> = dicts
                .iter()
                .enumerate()
                .map(|(w, d)| {
                    d.tuples(level)
                        .iter()
                        .map(|qp| {
                            let mut qp = *qp;
                            if level > 0 {
                                qp.left = remap[w][level - 1][qp.left as usize];
                            }
                            qp
                        })
                        .collect()
                })
                .collect();
            let all: Vec<QuickPattern> = translated
                .iter()
                .flatten()
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for (w, tuples) in translated.iter().enumerate() {
                remap[w].push(
                    tuples
                        .iter()
                        .map(|qp| all.binary_search(qp).unwrap() as u32)
                        .collect(),
                );
            }
            table.push(all);
        }
        (Self { levels: table }, remap)
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, level: usize) -> &[QuickPattern] {
        &self.levels[level]
    }

    /// Rebuilds the pattern (in tuple order) of quick pattern `id` at
    /// `level` from the join history. `lists` are the plan's lists.
    pub fn pattern(&self, lists: &[&SubgraphList], level: usize, id: u32) -> PatternGraph {
        let qp = self.levels[level][id as usize];
        let left = if level == 0 {
            lists[0].patterns()[qp.left as usize].clone()
        } else {
            self.pattern(lists, level - 1, qp.left)
        };
        let right = &lists[level + 1].patterns()[qp.right as usize];
        join_patterns(&left, right, qp.join_pos, qp.cross)
    }
}

/// Quick pattern of joining `s` (pattern `left`) and `t` (pattern `right`)
/// at `s[i] == t[j]`, where `cross(x, y)` tells whether the edge between
/// `x` in `s` and `y` in `t` is part of the result.
pub fn quick_pattern_of(
    left: u32,
    s: &[VertexId],
    i: usize,
    right: u32,
    t: &[VertexId],
    j: usize,
    cross: impl Fn(VertexId, VertexId) -> bool,
) -> QuickPattern {
    let n2 = t.len();
    let mut bits = 0u64;
    for (a, &x) in s.iter().enumerate().filter(|&(a, _)| a != i) {
        for (b, &y) in t.iter().enumerate().filter(|&(b, _)| b != j) {
            if cross(x, y) {
                bits |= 1 << (a * n2 + b);
            }
        }
    }
    QuickPattern {
        left,
        right,
        join_pos: (i * n2 + j) as u16,
        cross: bits,
    }
}

/// Pattern of `s` joined with `t` at `join_pos = i * |t| + j` with the given
/// cross edges, in the join's tuple order.
pub fn join_patterns(
    s: &PatternGraph,
    t: &PatternGraph,
    join_pos: u16,
    cross: u64,
) -> PatternGraph {
    let n1 = s.size();
    let n2 = t.size();
    let (i, j) = (join_pos as usize / n2, join_pos as usize % n2);
    let tp = |b: usize| match b.cmp(&j) {
        std::cmp::Ordering::Equal => i,
        std::cmp::Ordering::Less => n1 + b,
        std::cmp::Ordering::Greater => n1 + b - 1,
    };
    let n = n1 + n2 - 1;
    let mut labels = s.labels().to_vec();
    labels.resize(n, 0);
    let mut rows = s.rows().to_vec();
    rows.resize(n, 0);
    for b in 0..n2 {
        let p = tp(b);
        labels[p] = t.labels()[b];
        let mut m = t.rows()[b];
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            m &= m - 1;
            rows[p] |= 1 << tp(q);
        }
    }
    for a in 0..n1 {
        for b in 0..n2 {
            if cross >> (a * n2 + b) & 1 == 1 {
                let q = tp(b);
                rows[a] |= 1 << q;
                rows[q] |= 1 << a;
            }
        }
    }
    PatternGraph::from_rows(labels, rows)
}
