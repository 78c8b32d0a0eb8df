//! Pairwise combination of two subgraphs at a shared vertex.

use rustc_hash::FxHashSet;

use super::dissect::dissect;
use super::JoinStats;
use crate::canonical::PatternGraph;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::matcher::{label_pair, Induce, Size3Key};

/// Largest subgraph the join can build.
pub const MAX_JOIN_SIZE: usize = crate::canonical::MAX_CANONICAL_SIZE;

/// A join operand: graph ids by position plus adjacency rows over positions.
#[derive(Debug, Clone, Copy)]
pub struct Operand<'a> {
    pub vertices: &'a [VertexId],
    pub rows: &'a [u16],
}

/// Subgraph produced by a join, in tuple order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinedSubgraph {
    len: u8,
    vertices: [VertexId; MAX_JOIN_SIZE],
    rows: [u16; MAX_JOIN_SIZE],
    /// Quick pattern id, local to the worker that produced it.
    pub qp: u32,
}

impl JoinedSubgraph {
    /// Panics when `vertices` is longer than [`MAX_JOIN_SIZE`].
    pub fn new(vertices: &[VertexId], rows: &[u16]) -> Self {
        assert!(vertices.len() <= MAX_JOIN_SIZE && rows.len() == vertices.len());
        let mut v = [0; MAX_JOIN_SIZE];
        let mut r = [0; MAX_JOIN_SIZE];
        v[..vertices.len()].copy_from_slice(vertices);
        r[..rows.len()].copy_from_slice(rows);
        Self {
            len: vertices.len() as u8,
            vertices: v,
            rows: r,
            qp: 0,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices[..self.len()]
    }

    #[inline]
    pub fn rows(&self) -> &[u16] {
        &self.rows[..self.len()]
    }

    pub fn operand(&self) -> Operand<'_> {
        Operand {
            vertices: self.vertices(),
            rows: self.rows(),
        }
    }

    /// The labeled pattern in tuple order.
    pub fn pattern(&self, g: &LabeledGraph) -> PatternGraph {
        let labels = self.vertices().iter().map(|&v| g.label(v)).collect();
        PatternGraph::from_rows(labels, self.rows().to_vec())
    }

    /// Graph edges as sorted `(min, max)` pairs.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let v = self.vertices();
        let mut out = Vec::new();
        for a in 0..v.len() {
            let mut m = self.rows[a] & !((2u16 << a) - 1);
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                out.push((v[a].min(v[b]), v[a].max(v[b])));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Patterns known to be frequent, used to discard candidates early.
#[derive(Debug, Clone, Default)]
pub struct PruneSets {
    pub frequent3: FxHashSet<Size3Key>,
    /// Unordered `(min, max)` label pairs of frequent edges.
    pub frequent2: FxHashSet<(Label, Label)>,
}

/// A candidate accepted by [`combine`], with its cross-edge bits: bit
/// `a * |t| + b` marks an edge between `s[a]` and `t[b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Combined {
    pub sub: JoinedSubgraph,
    pub cross: u64,
}

/// Joins `s` and `t` at `s[i] == t[j]`, pushing every accepted subgraph to
/// `out`.
///
/// The result lists `s` followed by `t` without `t[j]`. Under edge semantics
/// every subset of graph edges running between the two sides yields one
/// candidate; under vertex semantics only the full set does. A candidate is
/// kept only if dissecting it at `|t|` gives back exactly `t` and `s`, which
/// makes each subgraph reachable from a single operand pair.
#[allow(clippy::too_many_arguments)]
pub fn combine(
    g: &LabeledGraph,
    induce: Induce,
    prune: Option<&PruneSets>,
    s: &Operand<'_>,
    i: usize,
    t: &Operand<'_>,
    j: usize,
    out: &mut Vec<Combined>,
    stats: &mut JoinStats,
) {
    let n1 = s.vertices.len();
    let n2 = t.vertices.len();
    let n = n1 + n2 - 1;
    stats.combine_calls += 1;
    debug_assert_eq!(s.vertices[i], t.vertices[j]);
    if n > MAX_JOIN_SIZE || n1 < 2 || n2 < 2 {
        return;
    }
    if t.vertices
        .iter()
        .enumerate()
        .any(|(b, v)| b != j && s.vertices.contains(v))
    {
        stats.overlap_rejects += 1;
        return;
    }
    let tp = |b: usize| match b.cmp(&j) {
        std::cmp::Ordering::Equal => i,
        std::cmp::Ordering::Less => n1 + b,
        std::cmp::Ordering::Greater => n1 + b - 1,
    };
    let mut vertices = [0; MAX_JOIN_SIZE];
    let mut rows = [0u16; MAX_JOIN_SIZE];
    vertices[..n1].copy_from_slice(s.vertices);
    rows[..n1].copy_from_slice(s.rows);
    for b in 0..n2 {
        let p = tp(b);
        vertices[p] = t.vertices[b];
        let mut m = t.rows[b];
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            m &= m - 1;
            rows[p] |= 1 << tp(q);
        }
    }

    let mut cross: [(u8, u8, u64); 32] = [(0, 0, 0); 32];
    let mut m = 0usize;
    let mut excluded = 0u32;
    for a in (0..n1).filter(|&a| a != i) {
        for b in (0..n2).filter(|&b| b != j) {
            let (x, y) = (s.vertices[a], t.vertices[b]);
            if !g.has_edge(x, y) {
                continue;
            }
            if let Some(p) = prune {
                if !p.frequent2.contains(&label_pair(g.label(x), g.label(y))) {
                    match induce {
                        Induce::Vertex => {
                            stats.pruned += 1;
                            return;
                        }
                        Induce::Edge => {
                            excluded += 1;
                            continue;
                        }
                    }
                }
            }
            cross[m] = (a as u8, tp(b) as u8, 1u64 << (a * n2 + b));
            m += 1;
        }
    }
    if excluded > 0 {
        stats.pruned += (1u64 << (m as u32 + excluded)) - (1u64 << m);
    }

    let s_mask: u16 = (1 << n1) - 1;
    let t_mask: u16 = (1 << i) | (((1u16 << n) - 1) & !s_mask);
    let subsets = match induce {
        Induce::Edge => 0..1u32 << m,
        Induce::Vertex => (1u32 << m) - 1..1u32 << m,
    };
    for subset in subsets {
        stats.candidates += 1;
        let mut r = rows;
        let mut bits = 0u64;
        let mut sm = subset;
        while sm != 0 {
            let e = sm.trailing_zeros() as usize;
            sm &= sm - 1;
            let (a, q, bit) = cross[e];
            r[a as usize] |= 1 << q;
            r[q as usize] |= 1 << a;
            bits |= bit;
        }
        match dissect(&vertices[..n], &r[..n], n2) {
            Some(d) if d.small == t_mask && d.rest == s_mask => {}
            _ => {
                stats.dissection_rejects += 1;
                continue;
            }
        }
        if let Some(p) = prune {
            if !size3_frequent(g, p, &vertices, &r, i, n1, n) {
                stats.pruned += 1;
                continue;
            }
        }
        out.push(Combined {
            sub: JoinedSubgraph::new(&vertices[..n], &r[..n]),
            cross: bits,
        });
    }
}

/// Every connected triple `{k, a, q}` with `a` from the left side and `q`
/// from the right must be a frequent size-3 pattern.
fn size3_frequent(
    g: &LabeledGraph,
    p: &PruneSets,
    vertices: &[VertexId],
    rows: &[u16],
    k: usize,
    n1: usize,
    n: usize,
) -> bool {
    let label = |x: usize| g.label(vertices[x]);
    for a in (0..n1).filter(|&a| a != k) {
        for q in n1..n {
            let ka = rows[k] >> a & 1 == 1;
            let kq = rows[k] >> q & 1 == 1;
            let aq = rows[a] >> q & 1 == 1;
            let key = match (ka, kq, aq) {
                (true, true, true) => Size3Key::triangle(label(k), label(a), label(q)),
                (true, true, false) => Size3Key::wedge(label(k), label(a), label(q)),
                (true, false, true) => Size3Key::wedge(label(a), label(k), label(q)),
                (false, true, true) => Size3Key::wedge(label(q), label(k), label(a)),
                _ => continue,
            };
            if !p.frequent3.contains(&key) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::join::quick_pattern_of;

    fn rows_of(k: usize, edges: &[(usize, usize)]) -> Vec<u16> {
        let mut rows = vec![0u16; k];
        for &(a, b) in edges {
            rows[a] |= 1 << b;
            rows[b] |= 1 << a;
        }
        rows
    }

    fn run(
        g: &LabeledGraph,
        induce: Induce,
        s: (&[VertexId], &[u16]),
        i: usize,
        t: (&[VertexId], &[u16]),
        j: usize,
    ) -> Vec<Combined> {
        let mut out = Vec::new();
        let mut stats = JoinStats::default();
        combine(
            g,
            induce,
            None,
            &Operand {
                vertices: s.0,
                rows: s.1,
            },
            i,
            &Operand {
                vertices: t.0,
                rows: t.1,
            },
            j,
            &mut out,
            &mut stats,
        );
        out
    }

    fn small_graph() -> LabeledGraph {
        // vertex 3 is a hub: 3-{2,4,5,7,8}, plus 4-5, 2-8, 4-8
        LabeledGraph::unlabeled(
            9,
            &[
                (3, 2),
                (3, 4),
                (3, 5),
                (3, 7),
                (3, 8),
                (4, 5),
                (2, 8),
                (4, 8),
            ],
        )
    }

    #[test]
    fn accepted_when_dissection_matches() {
        let g = small_graph();
        let wedge = rows_of(3, &[(0, 1), (0, 2)]);
        // s = wedge 3:(5,7), t = wedge 3:(2,4); dissection gives {2,3,4} / {3,5,7}
        let out = run(
            &g,
            Induce::Vertex,
            (&[3, 5, 7], &wedge),
            0,
            (&[3, 2, 4], &wedge),
            0,
        );
        assert_eq!(out.len(), 1);
        let c = &out[0];
        assert_eq!(c.sub.vertices(), &[3, 5, 7, 2, 4]);
        // the 4-5 edge joins t[2] and s[1]: bit 1 * 3 + 2
        assert_eq!(c.cross, 1 << 5);
        // swapped roles fail dissection
        let out = run(
            &g,
            Induce::Vertex,
            (&[3, 2, 4], &wedge),
            0,
            (&[3, 5, 7], &wedge),
            0,
        );
        assert!(out.is_empty());
    }

    #[test]
    fn cross_bits_match_quick_pattern_of() {
        let g = small_graph();
        let wedge = rows_of(3, &[(0, 1), (0, 2)]);
        let leaves = [2u32, 4, 5, 7, 8];
        let mut accepted = 0;
        for (x, &a) in leaves.iter().enumerate() {
            for &b in &leaves[x + 1..] {
                for (y, &c) in leaves.iter().enumerate() {
                    for &d in &leaves[y + 1..] {
                        let (s, t) = ([3, a, b], [3, c, d]);
                        for induce in [Induce::Vertex, Induce::Edge] {
                            for out in run(&g, induce, (&s, &wedge), 0, (&t, &wedge), 0) {
                                let edges = out.sub.edges();
                                let has = |u: u32, v: u32| edges.contains(&(u.min(v), u.max(v)));
                                let q = quick_pattern_of(0, &s, 0, 0, &t, 0, has);
                                assert_eq!(q.cross, out.cross);
                                if induce == Induce::Vertex {
                                    let full = quick_pattern_of(0, &s, 0, 0, &t, 0, |u, v| {
                                        g.has_edge(u, v)
                                    });
                                    assert_eq!(full.cross, out.cross);
                                }
                                accepted += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(accepted > 0);
    }

    #[test]
    fn edge_mode_expands_cross_subsets() {
        let g = small_graph();
        let wedge = rows_of(3, &[(0, 1), (0, 2)]);
        let e = run(
            &g,
            Induce::Edge,
            (&[3, 5, 7], &wedge),
            0,
            (&[3, 2, 4], &wedge),
            0,
        );
        let v = run(
            &g,
            Induce::Vertex,
            (&[3, 5, 7], &wedge),
            0,
            (&[3, 2, 4], &wedge),
            0,
        );
        assert!(v.iter().all(|c| e.contains(c)));
        for c in &e {
            let d = dissect(c.sub.vertices(), c.sub.rows(), 3).unwrap();
            assert_eq!(d.small, 0b11001);
            assert_eq!(d.rest, 0b00111);
        }
    }

    #[test]
    fn overlap_is_rejected() {
        let g = small_graph();
        let wedge = rows_of(3, &[(0, 1), (0, 2)]);
        let mut stats = JoinStats::default();
        let mut out = Vec::new();
        combine(
            &g,
            Induce::Edge,
            None,
            &Operand {
                vertices: &[3, 5, 4],
                rows: &wedge,
            },
            0,
            &Operand {
                vertices: &[3, 2, 4],
                rows: &wedge,
            },
            0,
            &mut out,
            &mut stats,
        );
        assert!(out.is_empty());
        assert_eq!(stats.overlap_rejects, 1);
    }

    #[test]
    fn pruning_drops_infrequent_triples() {
        let g = LabeledGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], vec![0, 0, 1, 1]).unwrap();
        let edge = rows_of(2, &[(0, 1)]);
        let mut prune = PruneSets::default();
        prune.frequent2.extend([(0, 0), (0, 1), (1, 1)]);
        let s: &[VertexId] = &[1, 2];
        let t: &[VertexId] = &[1, 0];
        let mut stats = JoinStats::default();
        let mut out = Vec::new();
        combine(
            &g,
            Induce::Edge,
            Some(&prune),
            &Operand {
                vertices: s,
                rows: &edge,
            },
            0,
            &Operand {
                vertices: t,
                rows: &edge,
            },
            0,
            &mut out,
            &mut stats,
        );
        let without = out.len();
        prune.frequent3.insert(Size3Key::wedge(0, 0, 1));
        out.clear();
        combine(
            &g,
            Induce::Edge,
            Some(&prune),
            &Operand {
                vertices: s,
                rows: &edge,
            },
            0,
            &Operand {
                vertices: t,
                rows: &edge,
            },
            0,
            &mut out,
            &mut stats,
        );
        assert_eq!(out.len(), without + 1);
        assert!(stats.pruned >= 1);
    }
}
