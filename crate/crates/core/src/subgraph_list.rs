//! Embedding lists with per-column vertex indexes, and their binary dump
//! format.

use thiserror::Error;

use crate::canonical::{PatternGraph, MAX_PATTERN_VERTICES};
use crate::graph::{LabeledGraph, VertexId};

const MAGIC: &[u8; 4] = b"FSL1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ListError {
    #[error("arity {0} is outside 1..={MAX_PATTERN_VERTICES}")]
    BadArity(usize),
    #[error("embedding {index}: {message}")]
    BadEmbedding { index: usize, message: String },
    #[error("pattern {index}: {message}")]
    BadPattern { index: usize, message: String },
    #[error("truncated input at byte {0}")]
    Truncated(usize),
    #[error("bad magic header")]
    BadMagic,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("vertex bound {found} exceeds {limit}")]
    VertexBound { found: usize, limit: usize },
}

/// One embedding borrowed from a [`SubgraphList`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Embedding<'a> {
    pub vertices: &'a [VertexId],
    pub pattern_idx: u32,
}

/// Dense vertex-keyed grouping of embedding positions for one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnIndex {
    offsets: Vec<u32>,
    positions: Vec<u32>,
    keys: Vec<VertexId>,
}

impl ColumnIndex {
    fn build(vertex_bound: usize, column: impl Iterator<Item = VertexId> + Clone) -> Self {
        let mut counts = vec![0u32; vertex_bound + 1];
        for v in column.clone() {
            counts[v as usize + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut positions = vec![0u32; *offsets.last().unwrap() as usize];
        for (pos, v) in column.enumerate() {
            positions[fill[v as usize] as usize] = pos as u32;
            fill[v as usize] += 1;
        }
        let keys = (0..vertex_bound as VertexId)
            .filter(|&v| offsets[v as usize + 1] > offsets[v as usize])
            .collect();
        Self {
            offsets,
            positions,
            keys,
        }
    }

    /// Embedding positions whose vertex in this column is `v`, ascending.
    #[inline]
    pub fn group(&self, v: VertexId) -> &[u32] {
        let v = v as usize;
        if v + 1 >= self.offsets.len() {
            return &[];
        }
        &self.positions[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// Vertices with a non-empty group, ascending.
    pub fn keys(&self) -> &[VertexId] {
        &self.keys
    }
}

/// A set of equal-arity embeddings over a pattern table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphList {
    arity: usize,
    symmetric: bool,
    vertex_bound: usize,
    patterns: Vec<PatternGraph>,
    vertices: Vec<VertexId>,
    pattern_of: Vec<u32>,
    index: Vec<ColumnIndex>,
}

impl SubgraphList {
    /// `vertices` is the flat row-major embedding array. `symmetric` marks a
    /// list that holds every embedding in all column rotations (the oriented
    /// edge list), so joins only need its first column.
    pub fn new(
        arity: usize,
        symmetric: bool,
        vertex_bound: usize,
        patterns: Vec<PatternGraph>,
        vertices: Vec<VertexId>,
        pattern_of: Vec<u32>,
    ) -> Result<Self, ListError> {
        if arity == 0 || arity > MAX_PATTERN_VERTICES {
            return Err(ListError::BadArity(arity));
        }
        for (index, p) in patterns.iter().enumerate() {
            if p.size() != arity {
                return Err(ListError::BadPattern {
                    index,
                    message: format!("size {} does not match arity {arity}", p.size()),
                });
            }
            if !p.is_connected() {
                return Err(ListError::BadPattern {
                    index,
                    message: "not connected".into(),
                });
            }
        }
        if vertices.len() != pattern_of.len() * arity {
            return Err(ListError::BadEmbedding {
                index: pattern_of.len(),
                message: "vertex array length does not match embedding count".into(),
            });
        }
        for (index, (tuple, &pid)) in vertices.chunks(arity).zip(&pattern_of).enumerate() {
            if pid as usize >= patterns.len() {
                return Err(ListError::BadEmbedding {
                    index,
                    message: format!("pattern index {pid} out of range"),
                });
            }
            for (i, &v) in tuple.iter().enumerate() {
                if v as usize >= vertex_bound {
                    return Err(ListError::BadEmbedding {
                        index,
                        message: format!("vertex {v} out of range"),
                    });
                }
                if tuple[..i].contains(&v) {
                    return Err(ListError::BadEmbedding {
                        index,
                        message: format!("vertex {v} repeated"),
                    });
                }
            }
        }
        let mut list = Self {
            arity,
            symmetric,
            vertex_bound,
            patterns,
            vertices,
            pattern_of,
            index: Vec::new(),
        };
        list.rebuild_index();
        Ok(list)
    }

    fn rebuild_index(&mut self) {
        let arity = self.arity;
        self.index = (0..arity)
            .map(|c| {
                let col = self.vertices.iter().skip(c).step_by(arity).copied();
                ColumnIndex::build(self.vertex_bound, col)
            })
            .collect();
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.pattern_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern_of.is_empty()
    }

    pub fn patterns(&self) -> &[PatternGraph] {
        &self.patterns
    }

    pub fn vertex_bound(&self) -> usize {
        self.vertex_bound
    }

    #[inline]
    pub fn embedding(&self, i: usize) -> Embedding<'_> {
        Embedding {
            vertices: &self.vertices[i * self.arity..(i + 1) * self.arity],
            pattern_idx: self.pattern_of[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Embedding<'_>> + '_ {
        (0..self.len()).map(move |i| self.embedding(i))
    }

    pub fn column(&self, c: usize) -> &ColumnIndex {
        &self.index[c]
    }

    /// Columns a join needs to probe.
    pub fn join_columns(&self) -> std::ops::Range<usize> {
        if self.symmetric {
            0..1
        } else {
            0..self.arity
        }
    }

    /// Bytes one embedding occupies, for memory-traffic accounting.
    pub fn embedding_bytes(&self) -> usize {
        self.arity * std::mem::size_of::<VertexId>() + std::mem::size_of::<u32>()
    }

    /// Drops embeddings whose pattern fails `keep` and rebuilds the column
    /// indexes. Pattern indices are left unchanged.
    pub fn retain_patterns(&mut self, keep: impl Fn(u32) -> bool) {
        let arity = self.arity;
        let mut vertices = Vec::with_capacity(self.vertices.len());
        let mut pattern_of = Vec::with_capacity(self.pattern_of.len());
        for (tuple, &pid) in self.vertices.chunks(arity).zip(&self.pattern_of) {
            if keep(pid) {
                vertices.extend_from_slice(tuple);
                pattern_of.push(pid);
            }
        }
        self.vertices = vertices;
        self.pattern_of = pattern_of;
        self.rebuild_index();
    }

    /// Checks every embedding against `g`: labels match the template and
    /// every template edge is a graph edge.
    pub fn validate_against(&self, g: &LabeledGraph) -> Result<(), ListError> {
        if self.vertex_bound > g.vertex_count() {
            return Err(ListError::BadEmbedding {
                index: 0,
                message: "vertex bound exceeds graph".into(),
            });
        }
        for (index, e) in self.iter().enumerate() {
            let p = &self.patterns[e.pattern_idx as usize];
            for (i, &v) in e.vertices.iter().enumerate() {
                if g.label(v) != p.labels()[i] {
                    return Err(ListError::BadEmbedding {
                        index,
                        message: format!("label of vertex {v} does not match template"),
                    });
                }
            }
            for (a, b) in p.edges() {
                if !g.has_edge(e.vertices[a], e.vertices[b]) {
                    return Err(ListError::BadEmbedding {
                        index,
                        message: format!("template edge {a}-{b} missing from graph"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Little-endian dump: magic, arity, symmetric flag, vertex bound, the
    /// pattern table (labels and adjacency rows), then `(pattern_idx,
    /// vertices...)` records.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.vertices.len() * 4 + self.len() * 4);
        out.extend_from_slice(MAGIC);
        out.push(self.arity as u8);
        out.push(self.symmetric as u8);
        out.extend_from_slice(&(self.vertex_bound as u32).to_le_bytes());
        out.extend_from_slice(&(self.patterns.len() as u32).to_le_bytes());
        for p in &self.patterns {
            for &l in p.labels() {
                out.extend_from_slice(&l.to_le_bytes());
            }
            for &r in p.rows() {
                out.extend_from_slice(&r.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for e in self.iter() {
            out.extend_from_slice(&e.pattern_idx.to_le_bytes());
            for &v in e.vertices {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ListError> {
        Self::decode_bounded(bytes, u32::MAX as usize)
    }

    /// Like [`decode`](Self::decode), but rejects lists over more than
    /// `max_vertices` vertices before allocating their column indexes.
    pub fn decode_bounded(bytes: &[u8], max_vertices: usize) -> Result<Self, ListError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(ListError::BadMagic);
        }
        let arity = r.u8()? as usize;
        if arity == 0 || arity > MAX_PATTERN_VERTICES {
            return Err(ListError::BadArity(arity));
        }
        let symmetric = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(ListError::BadMagic),
        };
        let vertex_bound = r.u32()? as usize;
        if vertex_bound > max_vertices {
            return Err(ListError::VertexBound {
                found: vertex_bound,
                limit: max_vertices,
            });
        }
        let pattern_count = r.u32()? as usize;
        let per_pattern = arity * 6;
        if pattern_count.saturating_mul(per_pattern) > r.remaining() {
            return Err(ListError::Truncated(bytes.len()));
        }
        let mut patterns = Vec::with_capacity(pattern_count);
        for index in 0..pattern_count {
            let labels = (0..arity).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            let rows = (0..arity).map(|_| r.u16()).collect::<Result<Vec<_>, _>>()?;
            for a in 0..arity {
                if rows[a] >> a & 1 == 1 || (arity < 16 && rows[a] >> arity != 0) {
                    return Err(ListError::BadPattern {
                        index,
                        message: "invalid adjacency row".into(),
                    });
                }
                for b in 0..arity {
                    if (rows[a] >> b & 1) != (rows[b] >> a & 1) {
                        return Err(ListError::BadPattern {
                            index,
                            message: "asymmetric adjacency".into(),
                        });
                    }
                }
            }
            patterns.push(PatternGraph::from_rows(labels, rows));
        }
        let count = r.u64()?;
        let record = 4 * (arity as u64 + 1);
        if count.saturating_mul(record) != r.remaining() as u64 {
            return if count.saturating_mul(record) > r.remaining() as u64 {
                Err(ListError::Truncated(bytes.len()))
            } else {
                Err(ListError::TrailingBytes(
                    r.remaining() - (count * record) as usize,
                ))
            };
        }
        let count = count as usize;
        let mut pattern_of = Vec::with_capacity(count);
        let mut vertices = Vec::with_capacity(count * arity);
        for _ in 0..count {
            pattern_of.push(r.u32()?);
            for _ in 0..arity {
                vertices.push(r.u32()?);
            }
        }
        Self::new(
            arity,
            symmetric,
            vertex_bound,
            patterns,
            vertices,
            pattern_of,
        )
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ListError> {
        if self.remaining() < n {
            return Err(ListError::Truncated(self.pos));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, ListError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ListError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, ListError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ListError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
