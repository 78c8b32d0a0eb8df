//! Size-3 and size-2 embedding lists: the inputs of the join.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::PatternGraph;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::subgraph_list::SubgraphList;

/// Subgraph semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Induce {
    /// Any connected edge subset.
    #[default]
    Edge,
    /// All graph edges among the chosen vertices.
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Size3Options {
    /// At most this many embeddings per center vertex, when set.
    pub sample_per_vertex: Option<usize>,
    pub seed: u64,
    pub induce: Induce,
}

/// Labeled size-3 template: wedges are `(center, leaf, leaf)` and triangles
/// list all three vertices, in both cases with labels non-decreasing after
/// the center. One key per isomorphism class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Size3Key {
    pub triangle: bool,
    pub labels: [Label; 3],
}

impl Size3Key {
    pub fn wedge(center: Label, a: Label, b: Label) -> Self {
        Self {
            triangle: false,
            labels: [center, a.min(b), a.max(b)],
        }
    }

    pub fn triangle(a: Label, b: Label, c: Label) -> Self {
        let mut labels = [a, b, c];
        labels.sort_unstable();
        Self {
            triangle: true,
            labels,
        }
    }

    pub fn template(&self) -> PatternGraph {
        let edges: &[(usize, usize)] = if self.triangle {
            &[(0, 1), (0, 2), (1, 2)]
        } else {
            &[(0, 1), (0, 2)]
        };
        PatternGraph::new(self.labels.to_vec(), edges).expect("size-3 templates are connected")
    }
}

/// Orders `(a, b)` by `(label, id)`.
#[inline]
fn by_label(g: &LabeledGraph, a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if (g.label(a), a) <= (g.label(b), b) {
        (a, b)
    } else {
        (b, a)
    }
}

fn wedge_tuple(
    g: &LabeledGraph,
    center: VertexId,
    a: VertexId,
    b: VertexId,
) -> (Size3Key, [VertexId; 3]) {
    let (x, y) = by_label(g, a, b);
    (
        Size3Key::wedge(g.label(center), g.label(x), g.label(y)),
        [center, x, y],
    )
}

fn triangle_tuple(
    g: &LabeledGraph,
    a: VertexId,
    b: VertexId,
    c: VertexId,
) -> (Size3Key, [VertexId; 3]) {
    let mut t = [a, b, c];
    t.sort_unstable_by_key(|&v| (g.label(v), v));
    (Size3Key::triangle(g.label(a), g.label(b), g.label(c)), t)
}

fn center_embeddings(
    g: &LabeledGraph,
    v: VertexId,
    opts: &Size3Options,
) -> Vec<(Size3Key, [VertexId; 3])> {
    let nbrs = g.neighbors(v);
    let mut out = Vec::new();
    let emit = |a: VertexId, b: VertexId, out: &mut Vec<_>| {
        // a < b: each unordered neighbor pair once per center
        let closed = g.has_edge(a, b);
        if !closed || opts.induce == Induce::Edge {
            out.push(wedge_tuple(g, v, a, b));
        }
        if closed && v < a {
            out.push(triangle_tuple(g, v, a, b));
        }
    };
    match opts.sample_per_vertex {
        None => {
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    emit(a, b, &mut out);
                }
            }
        }
        Some(quota) => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                opts.seed ^ (v as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let mut outer = nbrs.to_vec();
            outer.shuffle(&mut rng);
            let mut inner = nbrs.to_vec();
            'outer: for &a in &outer {
                inner.shuffle(&mut rng);
                for &b in &inner {
                    if a < b {
                        emit(a, b, &mut out);
                        if out.len() >= quota {
                            out.truncate(quota);
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every connected size-3 subgraph of `g` (or a per-center sample of them).
/// Wedges are emitted once per center and leaf pair; triangles once, from
/// their smallest vertex. Under vertex-induced semantics closed wedges are
/// skipped.
pub fn enumerate_size3(g: &LabeledGraph, opts: &Size3Options) -> SubgraphList {
    let per_center: Vec<Vec<(Size3Key, [VertexId; 3])>> = (0..g.vertex_count() as VertexId)
        .into_par_iter()
        .map(|v| center_embeddings(g, v, opts))
        .collect();
    let keys: BTreeSet<Size3Key> = per_center
        .iter()
        .flat_map(|c| c.iter().map(|(k, _)| *k))
        .collect();
    let keys: Vec<Size3Key> = keys.into_iter().collect();
    let total: usize = per_center.iter().map(Vec::len).sum();
    let mut vertices = Vec::with_capacity(total * 3);
    let mut pattern_of = Vec::with_capacity(total);
    for (key, tuple) in per_center.into_iter().flatten() {
        vertices.extend_from_slice(&tuple);
        pattern_of.push(keys.binary_search(&key).unwrap() as u32);
    }
    let patterns = keys.iter().map(Size3Key::template).collect();
    SubgraphList::new(3, false, g.vertex_count(), patterns, vertices, pattern_of)
        .expect("matcher output is well formed")
}

/// Both orientations of every edge. Patterns are ordered label pairs, so the
/// template labels agree with tuple positions.
pub fn build_edge_list(g: &LabeledGraph) -> SubgraphList {
    let pairs: BTreeSet<(Label, Label)> = g
        .vertices()
        .flat_map(|u| g.neighbors(u).iter().map(move |&v| (u, v)))
        .map(|(u, v)| (g.label(u), g.label(v)))
        .collect();
    let pairs: Vec<(Label, Label)> = pairs.into_iter().collect();
    let mut vertices = Vec::with_capacity(g.edge_count() * 4);
    let mut pattern_of = Vec::with_capacity(g.edge_count() * 2);
    for u in g.vertices() {
        for &v in g.neighbors(u) {
            vertices.extend_from_slice(&[u, v]);
            let idx = pairs.binary_search(&(g.label(u), g.label(v))).unwrap();
            pattern_of.push(idx as u32);
        }
    }
    let patterns = pairs
        .iter()
        .map(|&(a, b)| PatternGraph::new(vec![a, b], &[(0, 1)]).unwrap())
        .collect();
    SubgraphList::new(2, true, g.vertex_count(), patterns, vertices, pattern_of)
        .expect("edge list is well formed")
}

/// Unordered label pair of an edge.
#[inline]
pub fn label_pair(a: Label, b: Label) -> (Label, Label) {
    (a.min(b), a.max(b))
}
