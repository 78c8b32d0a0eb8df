//! Brute-force reference enumeration and mining for small graphs.
//!
//! Shares nothing with the join engine beyond graph and canonical forms.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::canonical::{canonicalize, CanonicalCode, PatternGraph};
use crate::graph::{LabeledGraph, VertexId};
use crate::matcher::Induce;

pub const ORACLE_MAX_SIZE: usize = 7;
pub const ORACLE_MAX_VERTICES: usize = 50;
pub const ORACLE_MAX_EDGES: usize = 128;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle handles subgraphs of 1..={ORACLE_MAX_SIZE} vertices, asked for {0}")]
    Size(usize),
    #[error("oracle handles graphs up to {ORACLE_MAX_VERTICES} vertices, got {0}")]
    Graph(usize),
    #[error("oracle handles graphs up to {ORACLE_MAX_EDGES} edges, got {0}")]
    Edges(usize),
}

/// A connected subgraph: sorted vertex ids and sorted `(min, max)` edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgraph {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

fn guard(g: &LabeledGraph, s: usize) -> Result<(), OracleError> {
    if s == 0 || s > ORACLE_MAX_SIZE {
        return Err(OracleError::Size(s));
    }
    if g.vertex_count() > ORACLE_MAX_VERTICES {
        return Err(OracleError::Graph(g.vertex_count()));
    }
    Ok(())
}

/// Every connected subgraph with exactly `s` vertices, once each, sorted.
///
/// Edge-induced subgraphs are grown from single edges by adding one adjacent
/// edge at a time, with a visited set of edge sets. Vertex-induced ones are
/// grown as vertex sets by adding one neighbor at a time.
pub fn enumerate_subgraphs(
    g: &LabeledGraph,
    s: usize,
    induce: Induce,
) -> Result<Vec<Subgraph>, OracleError> {
    guard(g, s)?;
    let mut out = match induce {
        Induce::Edge => edge_induced(g, s)?,
        Induce::Vertex => vertex_induced(g, s),
    };
    out.sort();
    Ok(out)
}

fn edge_induced(g: &LabeledGraph, s: usize) -> Result<Vec<Subgraph>, OracleError> {
    if s == 1 {
        return Ok(g
            .vertices()
            .map(|v| Subgraph {
                vertices: vec![v],
                edges: vec![],
            })
            .collect());
    }
    let edges: Vec<(VertexId, VertexId)> = g.edges().collect();
    if edges.len() > ORACLE_MAX_EDGES {
        return Err(OracleError::Edges(edges.len()));
    }
    let mut incident = vec![0u128; g.vertex_count()];
    for (i, &(a, b)) in edges.iter().enumerate() {
        incident[a as usize] |= 1 << i;
        incident[b as usize] |= 1 << i;
    }
    let mut seen: HashSet<u128> = HashSet::new();
    let mut stack: Vec<(u128, u64)> = Vec::new();
    for (i, &(a, b)) in edges.iter().enumerate() {
        seen.insert(1 << i);
        stack.push((1 << i, 1 << a | 1 << b));
    }
    let mut out = Vec::new();
    while let Some((emask, vmask)) = stack.pop() {
        if vmask.count_ones() as usize == s {
            out.push(Subgraph {
                vertices: bits64(vmask).map(|v| v as VertexId).collect(),
                edges: bits128(emask).map(|e| edges[e]).collect(),
            });
        }
        let mut frontier = 0u128;
        for v in bits64(vmask) {
            frontier |= incident[v];
        }
        for e in bits128(frontier & !emask) {
            let (a, b) = edges[e];
            let vnext = vmask | 1 << a | 1 << b;
            if vnext.count_ones() as usize > s {
                continue;
            }
            let enext = emask | 1 << e;
            if seen.insert(enext) {
                stack.push((enext, vnext));
            }
        }
    }
    Ok(out)
}

fn bits64(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            i
        })
    })
}

fn bits128(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            i
        })
    })
}

fn vertex_induced(g: &LabeledGraph, s: usize) -> Vec<Subgraph> {
    let mut seen: HashSet<u64> = HashSet::new();
    let mut stack: Vec<u64> = Vec::new();
    for v in g.vertices() {
        seen.insert(1 << v);
        stack.push(1 << v);
    }
    let mut out = Vec::new();
    while let Some(set) = stack.pop() {
        if set.count_ones() as usize == s {
            let vertices: Vec<VertexId> = bits64(set).map(|v| v as VertexId).collect();
            let mut edges = Vec::new();
            for (i, &a) in vertices.iter().enumerate() {
                for &b in &vertices[i + 1..] {
                    if g.has_edge(a, b) {
                        edges.push((a, b));
                    }
                }
            }
            out.push(Subgraph { vertices, edges });
            continue;
        }
        for u in bits64(set) {
            for &w in g.neighbors(u as VertexId) {
                let next = set | 1 << w;
                if next != set && seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    out
}

/// Labels and adjacency rows of an enumerated subgraph.
type ShapeKey = (Vec<u32>, Vec<u16>);

/// Exact support of every pattern with `s` vertices. A graph vertex counts
/// for a pattern position when some isomorphism of some subgraph onto the
/// pattern maps it there.
pub fn oracle_fsm(
    g: &LabeledGraph,
    s: usize,
    induce: Induce,
) -> Result<BTreeMap<CanonicalCode, usize>, OracleError> {
    let subgraphs = enumerate_subgraphs(g, s, induce)?;
    let mut domains: BTreeMap<CanonicalCode, Vec<BTreeSet<VertexId>>> = BTreeMap::new();
    let mut cache: HashMap<ShapeKey, (CanonicalCode, Vec<usize>)> = HashMap::new();
    for sg in &subgraphs {
        let pos: HashMap<VertexId, usize> = sg
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let local: Vec<(usize, usize)> = sg.edges.iter().map(|(a, b)| (pos[a], pos[b])).collect();
        let labels: Vec<u32> = sg.vertices.iter().map(|&v| g.label(v)).collect();
        let p = PatternGraph::new(labels.clone(), &local).expect("subgraphs are connected");
        let (code, order) = cache
            .entry((labels, p.rows().to_vec()))
            .or_insert_with(|| {
                let f = canonicalize(&p).expect("size within canonical limit");
                (f.code, f.order)
            })
            .clone();
        let d = domains
            .entry(code)
            .or_insert_with(|| vec![BTreeSet::new(); s]);
        for (i, &v) in sg.vertices.iter().enumerate() {
            d[order[i]].insert(v);
        }
    }
    let mut out = BTreeMap::new();
    for (code, doms) in domains {
        let pattern = code.to_pattern().expect("own codes decode");
        let autos = automorphisms(&pattern);
        let support = (0..s)
            .map(|p| {
                let mut all: BTreeSet<VertexId> = BTreeSet::new();
                for f in &autos {
                    all.extend(&doms[f[p]]);
                }
                all.len()
            })
            .min()
            .unwrap_or(0);
        out.insert(code, support);
    }
    Ok(out)
}

/// All label-preserving automorphisms by trying every permutation.
fn automorphisms(p: &PatternGraph) -> Vec<Vec<usize>> {
    let k = p.size();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    heap_permutations(k, &mut perm, &mut |f| {
        let ok = (0..k).all(|i| p.labels()[i] == p.labels()[f[i]])
            && (0..k).all(|i| (0..k).all(|j| p.has_edge(i, j) == p.has_edge(f[i], f[j])));
        if ok {
            out.push(f.to_vec());
        }
    });
    out
}

fn heap_permutations(n: usize, a: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    if n <= 1 {
        visit(a);
        return;
    }
    for i in 0..n - 1 {
        heap_permutations(n - 1, a, visit);
        if n.is_multiple_of(2) {
            a.swap(i, n - 1);
        } else {
            a.swap(0, n - 1);
        }
    }
    heap_permutations(n - 1, a, visit);
}
