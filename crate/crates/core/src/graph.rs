//! Immutable undirected vertex-labeled graph in CSR form, plus the edge-list
//! and label-file text formats it is loaded from.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type VertexId = u32;
pub type Label = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vertex {0} has no label")]
    MissingLabel(VertexId),
    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange {
        vertex: VertexId,
        vertex_count: usize,
    },
    #[error("label vector has {got} entries, graph has {expected} vertices")]
    LabelCount { expected: usize, got: usize },
    #[error("random labeling needs at least one label")]
    NoLabels,
}

/// Where vertex labels come from when loading a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelSource {
    /// Every vertex gets label 0.
    Uniform,
    /// `v label` lines covering every vertex.
    File(PathBuf),
    /// Labels drawn uniformly from `[0, count)` by a generator seeded with `seed`.
    Random { count: u32, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    labels: Vec<Label>,
}

impl LabeledGraph {
    /// Builds a graph from undirected edges. Self-loops and duplicate edges are
    /// dropped; each pair is stored in both directions.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(VertexId, VertexId)],
        labels: Vec<Label>,
    ) -> Result<Self, GraphError> {
        if labels.len() != vertex_count {
            return Err(GraphError::LabelCount {
                expected: vertex_count,
                got: labels.len(),
            });
        }
        let mut degree = vec![0usize; vertex_count];
        for &(u, v) in edges {
            for w in [u, v] {
                if w as usize >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: w,
                        vertex_count,
                    });
                }
            }
            if u != v {
                degree[u as usize] += 1;
                degree[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..vertex_count].to_vec();
        let mut neighbors = vec![0; offsets[vertex_count]];
        for &(u, v) in edges {
            if u == v {
                continue;
            }
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        // sort and dedup each row, then compact
        let mut compact = Vec::with_capacity(neighbors.len());
        let mut new_offsets = Vec::with_capacity(vertex_count + 1);
        new_offsets.push(0);
        for v in 0..vertex_count {
            let row = &mut neighbors[offsets[v]..offsets[v + 1]];
            row.sort_unstable();
            let mut last = None;
            for &w in row.iter() {
                if last != Some(w) {
                    compact.push(w);
                    last = Some(w);
                }
            }
            new_offsets.push(compact.len());
        }
        compact.shrink_to_fit();
        Ok(Self {
            offsets: new_offsets,
            neighbors: compact,
            labels,
        })
    }

    /// Same as [`from_edges`](Self::from_edges) with every label set to 0.
    pub fn unlabeled(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Self {
        Self::from_edges(vertex_count, edges, vec![0; vertex_count])
            .expect("edge endpoints must be below vertex_count")
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn label(&self, v: VertexId) -> Label {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Number of distinct label values, i.e. `max label + 1`.
    pub fn label_range(&self) -> u32 {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        // probe the shorter row
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count() as VertexId
    }

    /// Serializes the edges in the text format read by [`parse_edge_list`].
    pub fn to_edge_list_text(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Serializes labels in the `v label` format read by [`parse_label_file`].
    pub fn to_label_text(&self) -> String {
        let mut out = String::new();
        for (v, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{v} {l}");
        }
        out
    }

    /// Subgraph induced by `keep` (in that order), with vertices renumbered
    /// `0..keep.len()`.
    pub fn induced(&self, keep: &[VertexId]) -> LabeledGraph {
        let mut remap = vec![u32::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            remap[v as usize] = i as u32;
        }
        let mut edges = Vec::new();
        for (i, &v) in keep.iter().enumerate() {
            for &w in self.neighbors(v) {
                let j = remap[w as usize];
                if j != u32::MAX && (i as u32) < j {
                    edges.push((i as u32, j));
                }
            }
        }
        let labels = keep.iter().map(|&v| self.label(v)).collect();
        LabeledGraph::from_edges(keep.len(), &edges, labels).expect("remapped ids are in range")
    }
}

fn parse_fields<const N: usize>(
    line: &str,
    line_no: usize,
) -> Result<Option<[u32; N]>, GraphError> {
    let body = line.trim();
    if body.is_empty() || body.starts_with('#') || body.starts_with('%') {
        return Ok(None);
    }
    let mut out = [0u32; N];
    let mut fields = body.split_whitespace();
    for slot in out.iter_mut() {
        let tok = fields.next().ok_or_else(|| GraphError::Parse {
            line: line_no,
            message: format!("expected {N} fields"),
        })?;
        *slot = tok.parse().map_err(|_| GraphError::Parse {
            line: line_no,
            message: format!("invalid integer {tok:?}"),
        })?;
    }
    if fields.next().is_some() {
        return Err(GraphError::Parse {
            line: line_no,
            message: format!("expected {N} fields"),
        });
    }
    Ok(Some(out))
}

/// Parses whitespace-separated `u v` lines. Blank lines and lines starting
/// with `#` or `%` are skipped. Line numbers in errors are 1-based.
pub fn parse_edge_list(text: &str) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some([u, v]) = parse_fields::<2>(line, i + 1)? {
            if u == u32::MAX || v == u32::MAX {
                return Err(GraphError::Parse {
                    line: i + 1,
                    message: "vertex id too large".into(),
                });
            }
            edges.push((u, v));
        }
    }
    Ok(edges)
}

/// Parses `v label` lines into `(vertex, label)` pairs.
pub fn parse_label_file(text: &str) -> Result<Vec<(VertexId, Label)>, GraphError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some([v, l]) = parse_fields::<2>(line, i + 1)? {
            if v == u32::MAX {
                return Err(GraphError::Parse {
                    line: i + 1,
                    message: "vertex id too large".into(),
                });
            }
            out.push((v, l));
        }
    }
    Ok(out)
}

/// Builds a dense label vector from parsed label pairs; every vertex below
/// `vertex_count` must be covered. Later lines win on repeats.
pub fn labels_from_pairs(
    vertex_count: usize,
    pairs: &[(VertexId, Label)],
) -> Result<Vec<Label>, GraphError> {
    let mut labels = vec![None; vertex_count];
    for &(v, l) in pairs {
        let slot = labels
            .get_mut(v as usize)
            .ok_or(GraphError::VertexOutOfRange {
                vertex: v,
                vertex_count,
            })?;
        *slot = Some(l);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or(GraphError::MissingLabel(v as VertexId)))
        .collect()
}

/// Uniform random labels in `[0, count)`, reproducible for a fixed seed.
pub fn random_labels(vertex_count: usize, count: u32, seed: u64) -> Result<Vec<Label>, GraphError> {
    if count == 0 {
        return Err(GraphError::NoLabels);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..vertex_count).map(|_| rng.gen_range(0..count)).collect())
}

fn read(path: &Path) -> Result<String, GraphError> {
    fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a graph from an edge-list file. The vertex count is one past the
/// largest id seen in the edge file (or the label file, when given).
pub fn load_graph(edge_file: &Path, labels: &LabelSource) -> Result<LabeledGraph, GraphError> {
    let edges = parse_edge_list(&read(edge_file)?)?;
    let mut vertex_count = edges
        .iter()
        .map(|&(u, v)| u.max(v) as usize + 1)
        .max()
        .unwrap_or(0);
    let labels = match labels {
        LabelSource::Uniform => vec![0; vertex_count],
        LabelSource::Random { count, seed } => random_labels(vertex_count, *count, *seed)?,
        LabelSource::File(path) => {
            let pairs = parse_label_file(&read(path)?)?;
            if let Some(max) = pairs.iter().map(|&(v, _)| v as usize + 1).max() {
                vertex_count = vertex_count.max(max);
            }
            labels_from_pairs(vertex_count, &pairs)?
        }
    };
    LabeledGraph::from_edges(vertex_count, &edges, labels)
}
