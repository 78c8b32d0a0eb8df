//! Canonical labeling of small vertex-labeled patterns.
//!
//! Vertices are first split into cells by iterated color refinement seeded
//! with `(label, degree)`; the cell order is isomorphism-invariant and sorts
//! by label first. A branch-and-bound search over cell-respecting orderings
//! then picks the ordering whose adjacency matrix, read column by column over
//! the upper triangle, is lexicographically smallest. The first ordering found
//! wins ties.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::graph::Label;

/// Row bitmasks are `u16`, so patterns are bounded by this.
pub const MAX_PATTERN_VERTICES: usize = 16;
/// Largest pattern [`canonicalize`] accepts.
pub const MAX_CANONICAL_SIZE: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern must have at least one vertex")]
    Empty,
    #[error("pattern has {0} vertices; at most {MAX_CANONICAL_SIZE} are supported")]
    TooLarge(usize),
    #[error("pattern is not connected")]
    Disconnected,
    #[error("edge ({0}, {1}) is invalid")]
    BadEdge(usize, usize),
    #[error("malformed canonical code: {0}")]
    BadCode(&'static str),
}

/// A small labeled graph over positions `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternGraph {
    labels: Vec<Label>,
    rows: Vec<u16>,
}

impl PatternGraph {
    /// Connected pattern from labels and an edge list over positions.
    pub fn new(labels: Vec<Label>, edges: &[(usize, usize)]) -> Result<Self, PatternError> {
        let k = labels.len();
        if k == 0 {
            return Err(PatternError::Empty);
        }
        if k > MAX_PATTERN_VERTICES {
            return Err(PatternError::TooLarge(k));
        }
        let mut rows = vec![0u16; k];
        for &(a, b) in edges {
            if a >= k || b >= k || a == b {
                return Err(PatternError::BadEdge(a, b));
            }
            rows[a] |= 1 << b;
            rows[b] |= 1 << a;
        }
        let p = Self { labels, rows };
        if !p.is_connected() {
            return Err(PatternError::Disconnected);
        }
        Ok(p)
    }

    /// Builds from adjacency rows without the connectivity check. Rows must
    /// be symmetric and loop-free.
    pub(crate) fn from_rows(labels: Vec<Label>, rows: Vec<u16>) -> Self {
        debug_assert_eq!(labels.len(), rows.len());
        debug_assert!((0..rows.len()).all(|i| rows[i] >> i & 1 == 0));
        Self { labels, rows }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rows(&self) -> &[u16] {
        &self.rows
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    pub fn degree(&self, a: usize) -> u32 {
        self.rows[a].count_ones()
    }

    pub fn edge_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let k = self.size();
        let mut out = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let k = self.size();
        if k == 0 {
            return false;
        }
        let all = if k == 16 { u16::MAX } else { (1u16 << k) - 1 };
        let mut seen = 1u16;
        let mut frontier = 1u16;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.rows[v] & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == all
    }

    /// Relabels positions: position `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.size();
        assert_eq!(perm.len(), k);
        let mut labels = vec![0; k];
        let mut rows = vec![0u16; k];
        for i in 0..k {
            labels[perm[i]] = self.labels[i];
            let mut r = self.rows[i];
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                r &= r - 1;
                rows[perm[i]] |= 1 << perm[j];
            }
        }
        Self { labels, rows }
    }
}

/// Byte string identifying an isomorphism class: the vertex count, the labels
/// in canonical order (4 bytes big-endian each), then the upper triangle of
/// the canonical adjacency matrix row-major, packed most significant bit first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Box<[u8]>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0[0] as usize
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in self.0.iter() {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn from_hex(hex: &str) -> Result<Self, PatternError> {
        if !hex.len().is_multiple_of(2) || !hex.is_ascii() {
            return Err(PatternError::BadCode("odd length or non-ascii"));
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&hex[i..i + 2], 16))
            .collect::<Result<Vec<u8>, _>>()
            .map_err(|_| PatternError::BadCode("non-hex digit"))?;
        Self::from_bytes(bytes)
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, PatternError> {
        let code = CanonicalCode(bytes.into_boxed_slice());
        code.to_pattern()?;
        Ok(code)
    }

    /// Decodes the canonical pattern (vertices in canonical order).
    pub fn to_pattern(&self) -> Result<PatternGraph, PatternError> {
        let bytes = &self.0;
        let k = *bytes.first().ok_or(PatternError::BadCode("empty"))? as usize;
        if k == 0 {
            return Err(PatternError::Empty);
        }
        if k > MAX_PATTERN_VERTICES {
            return Err(PatternError::TooLarge(k));
        }
        let pairs = k * (k - 1) / 2;
        if bytes.len() != 1 + 4 * k + pairs.div_ceil(8) {
            return Err(PatternError::BadCode("length does not match vertex count"));
        }
        let labels = (0..k)
            .map(|i| {
                let o = 1 + 4 * i;
                u32::from_be_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]])
            })
            .collect();
        let adj = &bytes[1 + 4 * k..];
        let mut rows = vec![0u16; k];
        let mut bit = 0;
        for a in 0..k {
            for b in a + 1..k {
                if adj[bit / 8] >> (7 - bit % 8) & 1 == 1 {
                    rows[a] |= 1 << b;
                    rows[b] |= 1 << a;
                }
                bit += 1;
            }
        }
        if bit % 8 != 0 && adj[bit / 8] & (0xffu8 >> (bit % 8)) != 0 {
            return Err(PatternError::BadCode("padding bits set"));
        }
        let p = PatternGraph::from_rows(labels, rows);
        if !p.is_connected() {
            return Err(PatternError::Disconnected);
        }
        Ok(p)
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn encode(p: &PatternGraph) -> CanonicalCode {
    let k = p.size();
    let pairs = k * (k - 1) / 2;
    let mut bytes = Vec::with_capacity(1 + 4 * k + pairs.div_ceil(8));
    bytes.push(k as u8);
    for &l in p.labels() {
        bytes.extend_from_slice(&l.to_be_bytes());
    }
    let mut adj = vec![0u8; pairs.div_ceil(8)];
    let mut bit = 0;
    for a in 0..k {
        for b in a + 1..k {
            if p.has_edge(a, b) {
                adj[bit / 8] |= 0x80 >> (bit % 8);
            }
            bit += 1;
        }
    }
    bytes.extend_from_slice(&adj);
    CanonicalCode(bytes.into_boxed_slice())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub code: CanonicalCode,
    /// `order[original position] = canonical position`.
    pub order: Vec<usize>,
}

/// Which of several automorphic optimal orderings to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    First,
    Last,
}

pub fn canonicalize(p: &PatternGraph) -> Result<CanonicalForm, PatternError> {
    canonicalize_with(p, TieBreak::First)
}

pub fn canonicalize_with(p: &PatternGraph, tie: TieBreak) -> Result<CanonicalForm, PatternError> {
    let k = p.size();
    if k > MAX_CANONICAL_SIZE {
        return Err(PatternError::TooLarge(k));
    }
    let colors = refine_colors(p);
    let mut cell_of_pos: Vec<u32> = colors.clone();
    cell_of_pos.sort_unstable();
    let mut search = Search {
        p,
        colors: &colors,
        cell_of_pos: &cell_of_pos,
        tie,
        order: vec![0; k],
        cols: vec![0; k],
        best: None,
    };
    search.descend(0, 0);
    let (_, best_order) = search.best.expect("at least one ordering exists");
    let mut order = vec![0; k];
    for (pos, &v) in best_order.iter().enumerate() {
        order[v] = pos;
    }
    let code = encode(&p.permuted(&order));
    Ok(CanonicalForm { code, order })
}

/// Automorphism orbits: `orbit[v]` is the smallest position mapped onto `v`
/// by some label-preserving automorphism. Two positions share an orbit iff
/// marking either one yields the same canonical code.
pub fn orbits(p: &PatternGraph) -> Result<Vec<usize>, PatternError> {
    let k = p.size();
    if k > MAX_CANONICAL_SIZE {
        return Err(PatternError::TooLarge(k));
    }
    let dense = rank(&p.labels);
    let colors = refine_colors(p);
    let mut codes: Vec<Option<CanonicalCode>> = vec![None; k];
    let mut orbit: Vec<usize> = (0..k).collect();
    for v in 0..k {
        for u in 0..v {
            // refinement colors are invariant, so they bound the orbits
            if orbit[u] != u || colors[u] != colors[v] {
                continue;
            }
            for w in [u, v] {
                if codes[w].is_none() {
                    let labels = (0..k).map(|x| 2 * dense[x] + u32::from(x == w)).collect();
                    let marked = PatternGraph::from_rows(labels, p.rows.clone());
                    codes[w] = Some(canonicalize(&marked)?.code);
                }
            }
            if codes[u] == codes[v] {
                orbit[v] = u;
                break;
            }
        }
    }
    Ok(orbit)
}

/// Label-preserving isomorphism test.
pub fn is_isomorphic(a: &PatternGraph, b: &PatternGraph) -> bool {
    if a.size() != b.size() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut la = a.labels().to_vec();
    let mut lb = b.labels().to_vec();
    la.sort_unstable();
    lb.sort_unstable();
    if la != lb {
        return false;
    }
    match (canonicalize(a), canonicalize(b)) {
        (Ok(x), Ok(y)) => x.code == y.code,
        _ => false,
    }
}

/// Iterated color refinement. Colors are dense ranks of refinement
/// signatures, so their order is isomorphism-invariant; the first key is the
/// label, which keeps canonical label sequences sorted.
fn refine_colors(p: &PatternGraph) -> Vec<u32> {
    let k = p.size();
    let sig: Vec<(Label, u32)> = (0..k).map(|v| (p.labels[v], p.degree(v))).collect();
    let mut colors = rank(&sig);
    loop {
        let ext: Vec<(u32, Vec<u32>)> = (0..k)
            .map(|v| {
                let mut nb: Vec<u32> = (0..k)
                    .filter(|&w| p.has_edge(v, w))
                    .map(|w| colors[w])
                    .collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = rank(&ext);
        let distinct = |c: &[u32]| {
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        if distinct(&next) == distinct(&colors) {
            return colors;
        }
        colors = next;
    }
}

fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|key| sorted.binary_search(key).unwrap() as u32)
        .collect()
}

struct Search<'a> {
    p: &'a PatternGraph,
    colors: &'a [u32],
    cell_of_pos: &'a [u32],
    tie: TieBreak,
    /// `order[pos] = vertex` for the current partial assignment.
    order: Vec<usize>,
    /// Column `pos` of the upper triangle, position 0 as the top bit.
    cols: Vec<u16>,
    best: Option<(Vec<u16>, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, pos: usize, used: u16) {
        let k = self.p.size();
        if pos == k {
            let replace = match &self.best {
                None => true,
                Some((cols, _)) => match self.cols.cmp(cols) {
                    Ordering::Less => true,
                    Ordering::Equal => self.tie == TieBreak::Last,
                    Ordering::Greater => false,
                },
            };
            if replace {
                self.best = Some((self.cols.clone(), self.order.clone()));
            }
            return;
        }
        let cell = self.cell_of_pos[pos];
        let mut tried = 0u16;
        for v in 0..k {
            if used >> v & 1 == 1 || self.colors[v] != cell {
                continue;
            }
            // swapping twins is an automorphism fixing everything else
            if self.has_tried_twin(v, tried) {
                continue;
            }
            tried |= 1 << v;
            let mut col = 0u16;
            for i in 0..pos {
                col = col << 1 | self.p.has_edge(self.order[i], v) as u16;
            }
            self.cols[pos] = col;
            if let Some((best, _)) = &self.best {
                if self.cols[..=pos].cmp(&best[..=pos]) == Ordering::Greater {
                    continue;
                }
            }
            self.order[pos] = v;
            self.descend(pos + 1, used | 1 << v);
        }
    }

    fn has_tried_twin(&self, v: usize, tried: u16) -> bool {
        let rows = &self.p.rows;
        let mut t = tried;
        while t != 0 {
            let u = t.trailing_zeros() as usize;
            t &= t - 1;
            if rows[u] & !(1 << v) == rows[v] & !(1 << u) {
                return true;
            }
        }
        false
    }
}
