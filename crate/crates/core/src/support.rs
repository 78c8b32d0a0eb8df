//! Minimum image based support and pattern aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::canonical::{
    canonicalize_with, orbits, CanonicalCode, PatternError, PatternGraph, TieBreak,
};
use crate::graph::{LabeledGraph, VertexId};
use crate::join::{JoinOutput, JoinSink, JoinedSubgraph};
use crate::subgraph_list::SubgraphList;

/// Distinct graph vertices seen at each pattern position.
pub type DomainSets = Vec<FxHashSet<VertexId>>;

/// Minimum support, absolute or relative to the vertex count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportThreshold {
    Absolute(usize),
    Fraction(f64),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid support threshold {input:?}: {reason}")]
pub struct ThresholdError {
    pub input: String,
    pub reason: &'static str,
}

impl SupportThreshold {
    /// Absolute threshold for a graph with `vertices` vertices. Fractions
    /// round up and never go below 1.
    pub fn resolve(&self, vertices: usize) -> usize {
        match *self {
            SupportThreshold::Absolute(t) => t,
            SupportThreshold::Fraction(f) => ((f * vertices as f64).ceil() as usize).max(1),
        }
    }
}

impl fmt::Display for SupportThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportThreshold::Absolute(t) => write!(f, "{t}"),
            SupportThreshold::Fraction(x) => write!(f, "{x}n"),
        }
    }
}

impl FromStr for SupportThreshold {
    type Err = ThresholdError;

    /// Accepts `100`, `0.1%`, `n*0.001`, `0.001*n` and `0.001n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ThresholdError {
            input: s.to_string(),
            reason,
        };
        let t = s.trim();
        let fraction = |x: &str, scale: f64| -> Result<Self, ThresholdError> {
            let v: f64 = x.trim().parse().map_err(|_| err("not a number"))?;
            let v = v * scale;
            if !v.is_finite() || v <= 0.0 || v > 1.0 {
                return Err(err("fraction must be in (0, 1]"));
            }
            Ok(SupportThreshold::Fraction(v))
        };
        if let Some(x) = t.strip_suffix('%') {
            return fraction(x, 0.01);
        }
        if let Some(x) = t.strip_prefix("n*").or_else(|| t.strip_prefix("n *")) {
            return fraction(x, 1.0);
        }
        if let Some(x) = t.strip_suffix("*n").or_else(|| t.strip_suffix("* n")) {
            return fraction(x, 1.0);
        }
        if let Some(x) = t.strip_suffix('n') {
            return fraction(x, 1.0);
        }
        let v: usize = t.parse().map_err(|_| err("not a positive integer"))?;
        if v == 0 {
            return Err(err("must be positive"));
        }
        Ok(SupportThreshold::Absolute(v))
    }
}

/// A pattern with its support. Domains are in canonical position order,
/// already merged across automorphic positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternStats {
    pub code: CanonicalCode,
    pub support: usize,
    pub embeddings: u64,
    pub domains: Vec<Vec<VertexId>>,
    /// Quick pattern ids folded into this pattern, ascending.
    pub qp_ids: Vec<u32>,
}

#[derive(Debug, Clone, Default)]
struct Accum {
    domains: DomainSets,
    embeddings: u64,
    qp_ids: Vec<u32>,
}

/// Groups of subgraphs folded into patterns by canonical code.
#[derive(Debug, Clone, Default)]
pub struct Aggregation {
    patterns: BTreeMap<CanonicalCode, Accum>,
    pub canonicalizations: u64,
    pub groups: u64,
    pub tie: TieBreak,
}

impl Aggregation {
    pub fn new(tie: TieBreak) -> Self {
        Self {
            tie,
            ..Default::default()
        }
    }

    /// Adds a group of same-pattern subgraphs. `domains[p]` holds the
    /// vertices seen at position `p` of `pattern`. One canonicalization per
    /// call.
    pub fn add_group(
        &mut self,
        pattern: &PatternGraph,
        domains: DomainSets,
        embeddings: u64,
        qp: Option<u32>,
    ) -> Result<CanonicalCode, PatternError> {
        let form = canonicalize_with(pattern, self.tie)?;
        self.canonicalizations += 1;
        self.groups += 1;
        let acc = self
            .patterns
            .entry(form.code.clone())
            .or_insert_with(|| Accum {
                domains: vec![FxHashSet::default(); pattern.size()],
                embeddings: 0,
                qp_ids: Vec::new(),
            });
        acc.embeddings += embeddings;
        acc.qp_ids.extend(qp);
        for (orig, dom) in domains.into_iter().enumerate() {
            let target = &mut acc.domains[form.order[orig]];
            if target.is_empty() {
                *target = dom;
            } else {
                target.extend(dom);
            }
        }
        Ok(form.code)
    }

    /// Patterns sorted by canonical code.
    pub fn finish(self) -> Result<Vec<PatternStats>, PatternError> {
        let mut out = Vec::with_capacity(self.patterns.len());
        for (code, acc) in self.patterns {
            let orbit = orbits(&code.to_pattern()?)?;
            let k = orbit.len();
            let mut merged: Vec<FxHashSet<VertexId>> = vec![FxHashSet::default(); k];
            for (p, dom) in acc.domains.into_iter().enumerate() {
                merged[orbit[p]].extend(dom);
            }
            let domains: Vec<Vec<VertexId>> = (0..k)
                .map(|p| {
                    let mut d: Vec<VertexId> = merged[orbit[p]].iter().copied().collect();
                    d.sort_unstable();
                    d
                })
                .collect();
            let support = domains.iter().map(Vec::len).min().unwrap_or(0);
            let mut qp_ids = acc.qp_ids;
            qp_ids.sort_unstable();
            out.push(PatternStats {
                code,
                support,
                embeddings: acc.embeddings,
                domains,
                qp_ids,
            });
        }
        Ok(out)
    }
}

/// Keeps patterns with support at least `threshold`.
pub fn filter_frequent(stats: Vec<PatternStats>, threshold: usize) -> Vec<PatternStats> {
    stats
        .into_iter()
        .filter(|p| p.support >= threshold)
        .collect()
}

/// Support of every pattern in a list, plus the canonical code of each
/// pattern index.
pub fn aggregate_list(
    list: &SubgraphList,
    tie: TieBreak,
) -> Result<(Aggregation, Vec<CanonicalCode>), PatternError> {
    let k = list.arity();
    let mut groups: Vec<(DomainSets, u64)> =
        vec![(vec![FxHashSet::default(); k], 0); list.patterns().len()];
    for e in list.iter() {
        let (doms, count) = &mut groups[e.pattern_idx as usize];
        *count += 1;
        for (d, &v) in doms.iter_mut().zip(e.vertices) {
            d.insert(v);
        }
    }
    let mut agg = Aggregation::new(tie);
    let mut codes = Vec::with_capacity(groups.len());
    for (pattern, (doms, count)) in list.patterns().iter().zip(groups) {
        codes.push(agg.add_group(pattern, doms, count, None)?);
    }
    Ok((agg, codes))
}

#[derive(Debug, Clone)]
struct Group {
    domains: DomainSets,
    embeddings: u64,
}

impl Group {
    fn new(k: usize) -> Self {
        Self {
            domains: vec![FxHashSet::default(); k],
            embeddings: 0,
        }
    }

    fn absorb(&mut self, other: Group) {
        self.embeddings += other.embeddings;
        for (a, b) in self.domains.iter_mut().zip(other.domains) {
            a.extend(b);
        }
    }
}

/// Join sink grouping subgraphs by quick pattern.
#[derive(Debug)]
pub struct QpGroups<'g> {
    g: &'g LabeledGraph,
    groups: FxHashMap<u32, Group>,
    reps: Option<FxHashMap<u32, PatternGraph>>,
    /// Members whose tuple-order pattern differed from their group's first
    /// member. Only counted when verifying.
    pub mismatches: u64,
}

impl<'g> QpGroups<'g> {
    /// With `verify`, every member's pattern is checked against the first
    /// member of its group.
    pub fn new(g: &'g LabeledGraph, verify: bool) -> Self {
        Self {
            g,
            groups: FxHashMap::default(),
            reps: verify.then(FxHashMap::default),
            mismatches: 0,
        }
    }
}

impl JoinSink for QpGroups<'_> {
    fn accept(&mut self, sub: &JoinedSubgraph) {
        let group = self
            .groups
            .entry(sub.qp)
            .or_insert_with(|| Group::new(sub.len()));
        group.embeddings += 1;
        for (d, &v) in group.domains.iter_mut().zip(sub.vertices()) {
            d.insert(v);
        }
        if let Some(reps) = &mut self.reps {
            let p = sub.pattern(self.g);
            match reps.get(&sub.qp) {
                Some(r) if *r != p => self.mismatches += 1,
                Some(_) => {}
                None => {
                    reps.insert(sub.qp, p);
                }
            }
        }
    }
}

/// Join sink grouping subgraphs by labels and edges in vertex-id order, the
/// grouping available without join history.
#[derive(Debug)]
pub struct EdgeListGroups<'g> {
    g: &'g LabeledGraph,
    groups: FxHashMap<Box<[u8]>, Group>,
}

impl<'g> EdgeListGroups<'g> {
    pub fn new(g: &'g LabeledGraph) -> Self {
        Self {
            g,
            groups: FxHashMap::default(),
        }
    }
}

fn id_order_key(g: &LabeledGraph, sub: &JoinedSubgraph) -> (Box<[u8]>, Vec<usize>) {
    let k = sub.len();
    let v = sub.vertices();
    let mut by_rank: Vec<usize> = (0..k).collect();
    by_rank.sort_unstable_by_key(|&p| v[p]);
    let mut rank_of = vec![0usize; k];
    for (r, &p) in by_rank.iter().enumerate() {
        rank_of[p] = r;
    }
    let mut key = Vec::with_capacity(k * 6);
    for &p in &by_rank {
        key.extend_from_slice(&g.label(v[p]).to_le_bytes());
    }
    for &p in &by_rank {
        let mut m = sub.rows()[p];
        let mut row = 0u16;
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            m &= m - 1;
            row |= 1 << rank_of[q];
        }
        key.extend_from_slice(&row.to_le_bytes());
    }
    (key.into_boxed_slice(), by_rank)
}

fn pattern_from_key(key: &[u8]) -> PatternGraph {
    let k = key.len() / 6;
    let labels = key[..4 * k]
        .chunks(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let rows = key[4 * k..]
        .chunks(2)
        .map(|c| u16::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PatternGraph::from_rows(labels, rows)
}

impl JoinSink for EdgeListGroups<'_> {
    fn accept(&mut self, sub: &JoinedSubgraph) {
        let (key, by_rank) = id_order_key(self.g, sub);
        let group = self
            .groups
            .entry(key)
            .or_insert_with(|| Group::new(sub.len()));
        group.embeddings += 1;
        for (d, &p) in group.domains.iter_mut().zip(&by_rank) {
            d.insert(sub.vertices()[p]);
        }
    }
}

/// Folds quick pattern groups from all workers: one canonicalization per
/// global quick pattern. Returns the aggregation, the number of global
/// quick patterns and the verification mismatches.
pub fn aggregate_quick_patterns(
    out: JoinOutput<QpGroups<'_>>,
    lists: &[&SubgraphList],
    tie: TieBreak,
) -> Result<(Aggregation, usize, u64), PatternError> {
    let (table, remap) = out.merge_quick_patterns();
    let last = lists.len() - 2;
    let mut merged: BTreeMap<u32, Group> = BTreeMap::new();
    let mut mismatches = 0;
    let mut reps: FxHashMap<u32, PatternGraph> = FxHashMap::default();
    for (w, worker) in out.workers.into_iter().enumerate() {
        let sink = worker.sink;
        mismatches += sink.mismatches;
        if let Some(local_reps) = sink.reps {
            for (local, p) in local_reps {
                let global = remap[w][last][local as usize];
                match reps.get(&global) {
                    Some(r) if *r != p => mismatches += 1,
                    Some(_) => {}
                    None => {
                        reps.insert(global, p);
                    }
                }
            }
        }
        for (local, group) in sink.groups {
            let global = remap[w][last][local as usize];
            match merged.get_mut(&global) {
                Some(g) => g.absorb(group),
                None => {
                    merged.insert(global, group);
                }
            }
        }
    }
    let qps = merged.len();
    let mut agg = Aggregation::new(tie);
    for (id, group) in merged {
        let pattern = table.pattern(lists, last, id);
        if let Some(r) = reps.get(&id) {
            if *r != pattern {
                mismatches += 1;
            }
        }
        agg.add_group(&pattern, group.domains, group.embeddings, Some(id))?;
    }
    Ok((agg, qps, mismatches))
}

/// Folds id-order groups from all workers: one canonicalization per
/// distinct labeled edge layout. Returns the aggregation and group count.
pub fn aggregate_edge_lists(
    out: JoinOutput<EdgeListGroups<'_>>,
    tie: TieBreak,
) -> Result<(Aggregation, usize), PatternError> {
    let mut merged: BTreeMap<Box<[u8]>, Group> = BTreeMap::new();
    for worker in out.workers {
        for (key, group) in worker.sink.groups {
            match merged.get_mut(&key) {
                Some(g) => g.absorb(group),
                None => {
                    merged.insert(key, group);
                }
            }
        }
    }
    let count = merged.len();
    let mut agg = Aggregation::new(tie);
    for (key, group) in merged {
        agg.add_group(
            &pattern_from_key(&key),
            group.domains,
            group.embeddings,
            None,
        )?;
    }
    Ok((agg, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_parse() {
        use SupportThreshold::*;
        assert_eq!("100".parse(), Ok(Absolute(100)));
        assert_eq!("0.1%".parse(), Ok(Fraction(0.001)));
        assert_eq!("n*0.001".parse(), Ok(Fraction(0.001)));
        assert_eq!("0.001n".parse(), Ok(Fraction(0.001)));
        assert_eq!("0.5*n".parse(), Ok(Fraction(0.5)));
        for bad in ["0", "-3", "abc", "0n", "2n", "150%", "", "n*", "nan%"] {
            assert!(bad.parse::<SupportThreshold>().is_err(), "{bad}");
        }
        assert_eq!(Fraction(0.001).resolve(3000), 3);
        assert_eq!(Fraction(0.001).resolve(3001), 4);
        assert_eq!(Fraction(0.001).resolve(10), 1);
        assert_eq!(Absolute(7).resolve(1), 7);
    }

    #[test]
    fn automorphic_positions_share_domains() {
        // star 0-{1,2,3}: one wedge per leaf pair, both leaves in one orbit
        let g = LabeledGraph::unlabeled(4, &[(0, 1), (0, 2), (0, 3)]);
        let list = crate::matcher::enumerate_size3(&g, &Default::default());
        let (agg, codes) = aggregate_list(&list, TieBreak::First).unwrap();
        assert_eq!(codes.len(), 1);
        let stats = agg.finish().unwrap();
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].embeddings, 3);
        // center domain {0}; leaf domain {1,2,3}
        assert_eq!(stats[0].support, 1);
        let mut sizes: Vec<usize> = stats[0].domains.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 3]);
    }

    #[test]
    fn symmetric_edge_support_counts_both_ends() {
        let g = LabeledGraph::unlabeled(3, &[(0, 1), (1, 2)]);
        let list = crate::matcher::build_edge_list(&g);
        let (agg, _) = aggregate_list(&list, TieBreak::First).unwrap();
        let stats = agg.finish().unwrap();
        assert_eq!(stats[0].support, 3);
        assert_eq!(filter_frequent(stats.clone(), 3).len(), 1);
        assert!(filter_frequent(stats, 4).is_empty());
    }

    #[test]
    fn id_order_key_round_trips() {
        let g = LabeledGraph::from_edges(5, &[(4, 2), (2, 0)], vec![0, 0, 1, 0, 2]).unwrap();
        let rows = [0b110, 0b001, 0b001];
        let sub = JoinedSubgraph::new(&[2, 4, 0], &rows);
        let (key, by_rank) = id_order_key(&g, &sub);
        assert_eq!(by_rank, vec![2, 0, 1]);
        let p = pattern_from_key(&key);
        assert_eq!(p.labels(), &[0, 1, 2]);
        assert_eq!(p.edges(), vec![(0, 1), (1, 2)]);
    }
}
