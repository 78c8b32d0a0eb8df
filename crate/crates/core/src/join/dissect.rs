//! Smallest-vertex-first dissection of a joined subgraph.
//!
//! All masks are over subgraph positions (`u16`, one bit per position).

use crate::graph::VertexId;

/// Result of [`dissect`]: `small` holds `n` positions, `rest` the others plus
/// the one position the two parts share. Both parts are connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dissection {
    pub small: u16,
    pub rest: u16,
}

impl Dissection {
    pub fn shared(&self) -> u16 {
        self.small & self.rest
    }
}

#[inline]
fn full(k: usize) -> u16 {
    if k >= 16 {
        u16::MAX
    } else {
        (1u16 << k) - 1
    }
}

/// Whether `mask` induces a connected subgraph of `rows`.
#[inline]
fn connected(rows: &[u16], mask: u16, ops: &mut u64) -> bool {
    if mask == 0 {
        return false;
    }
    let start = mask & mask.wrapping_neg();
    let mut seen = start;
    let mut frontier = start;
    while frontier != 0 {
        *ops += 1;
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = rows[v] & mask & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen == mask
}

/// Splits a connected subgraph into a connected `n`-vertex part and a
/// connected remainder sharing exactly one vertex with it.
///
/// `vertices[p]` is the graph id at position `p` and `rows[p]` its adjacency
/// within the subgraph. Starting vertices are tried in ascending id order;
/// from each, the part grows by always taking the smallest-id neighbor of
/// what has been visited, and the remainder is closed with the smallest-id
/// member of the part that makes it connected. If no start vertex yields a
/// split, the first `(n-1)`-subset `D` (by ascending id-rank bitmask) whose
/// removal leaves a connected remainder is used, closed with the smallest
/// remainder vertex connecting `D`.
///
/// Returns `None` only when `n` is out of range or the subgraph is
/// disconnected.
pub fn dissect(vertices: &[VertexId], rows: &[u16], n: usize) -> Option<Dissection> {
    dissect_counted(vertices, rows, n).0
}

/// [`dissect`] plus the number of elementary mask operations performed.
pub fn dissect_counted(vertices: &[VertexId], rows: &[u16], n: usize) -> (Option<Dissection>, u64) {
    let k = vertices.len();
    debug_assert_eq!(rows.len(), k);
    let mut ops = 0u64;
    if n < 2 || n >= k || k > 16 {
        return (None, ops);
    }
    // work in id-rank space so "smallest id" is the lowest bit
    let mut by_rank: [usize; 16] = [0; 16];
    for (p, slot) in by_rank.iter_mut().enumerate().take(k) {
        *slot = p;
    }
    by_rank[..k].sort_unstable_by_key(|&p| vertices[p]);
    let mut rank_of = [0usize; 16];
    for (r, &p) in by_rank[..k].iter().enumerate() {
        rank_of[p] = r;
    }
    let mut ranked = [0u16; 16];
    for p in 0..k {
        let mut m = rows[p];
        let mut out = 0u16;
        while m != 0 {
            let q = m.trailing_zeros() as usize;
            m &= m - 1;
            out |= 1 << rank_of[q];
        }
        ranked[rank_of[p]] = out;
    }
    let rows = &ranked[..k];
    let all = full(k);
    let to_positions = |mask: u16| {
        let mut m = mask;
        let mut out = 0u16;
        while m != 0 {
            let r = m.trailing_zeros() as usize;
            m &= m - 1;
            out |= 1 << by_rank[r];
        }
        out
    };
    if !connected(rows, all, &mut ops) {
        return (None, ops);
    }

    for start in 0..k {
        let mut part = 1u16 << start;
        let mut reach = rows[start];
        for _ in 1..n {
            ops += 1;
            let frontier = reach & !part;
            let next = frontier.trailing_zeros() as usize;
            part |= 1 << next;
            reach |= rows[next];
        }
        let remainder = all & !part;
        let mut cands = part;
        while cands != 0 {
            let v = cands & cands.wrapping_neg();
            cands &= cands - 1;
            let rest = remainder | v;
            if connected(rows, rest, &mut ops) {
                let d = Dissection {
                    small: to_positions(part),
                    rest: to_positions(rest),
                };
                return (Some(d), ops);
            }
        }
    }

    // greedy spanning found nothing: search removal sets directly
    let d = n - 1;
    let mut removed: u16 = (1u16 << d) - 1;
    while removed <= all {
        ops += 1;
        let rest = all & !removed;
        if connected(rows, rest, &mut ops) {
            let mut cands = rest;
            while cands != 0 {
                let v = cands & cands.wrapping_neg();
                cands &= cands - 1;
                ops += 1;
                if connected(rows, removed | v, &mut ops) {
                    let dis = Dissection {
                        small: to_positions(removed | v),
                        rest: to_positions(rest),
                    };
                    return (Some(dis), ops);
                }
            }
        }
        // next mask with the same popcount
        let c = removed & removed.wrapping_neg();
        let Some(r) = removed.checked_add(c) else {
            break;
        };
        removed = (((r ^ removed) >> 2) / c) | r;
    }
    (None, ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows_of(k: usize, edges: &[(usize, usize)]) -> Vec<u16> {
        let mut rows = vec![0u16; k];
        for &(a, b) in edges {
            rows[a] |= 1 << b;
            rows[b] |= 1 << a;
        }
        rows
    }

    fn set(vertices: &[VertexId], mask: u16) -> Vec<VertexId> {
        let mut out: Vec<_> = (0..vertices.len())
            .filter(|&p| mask >> p & 1 == 1)
            .map(|p| vertices[p])
            .collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn five_vertex_example() {
        // vertices 2,3,4,5,7 with edges 3-2, 3-4, 3-5, 3-7, 4-5
        let vertices = [3, 4, 2, 7, 5];
        let rows = rows_of(5, &[(0, 2), (0, 1), (0, 4), (0, 3), (1, 4)]);
        let d = dissect(&vertices, &rows, 3).unwrap();
        assert_eq!(set(&vertices, d.small), vec![2, 3, 4]);
        assert_eq!(set(&vertices, d.rest), vec![3, 5, 7]);
    }

    #[test]
    fn second_five_vertex_example() {
        // vertices 3,7,4,8,5 with edges 3-7, 3-4, 3-8, 3-5, 4-5
        let vertices = [3, 7, 4, 8, 5];
        let rows = rows_of(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (2, 4)]);
        let d = dissect(&vertices, &rows, 3).unwrap();
        assert_eq!(set(&vertices, d.small), vec![3, 4, 5]);
        assert_eq!(set(&vertices, d.rest), vec![3, 7, 8]);
    }

    #[test]
    fn path_split_in_two() {
        let vertices = [0, 1, 2, 3];
        let rows = rows_of(4, &[(0, 1), (1, 2), (2, 3)]);
        let d = dissect(&vertices, &rows, 2).unwrap();
        assert_eq!(set(&vertices, d.small), vec![0, 1]);
        assert_eq!(set(&vertices, d.rest), vec![1, 2, 3]);
    }

    #[test]
    fn double_star_needs_fallback() {
        // greedy always grabs both hubs 0 and 1
        let vertices = [0, 1, 2, 3, 4, 5];
        let rows = rows_of(6, &[(0, 1), (0, 4), (0, 5), (1, 2), (1, 3)]);
        let d = dissect(&vertices, &rows, 3).unwrap();
        assert_eq!(d.shared().count_ones(), 1);
        assert_eq!(d.small.count_ones(), 3);
        assert_eq!(d.small | d.rest, 0b111111);
    }

    #[test]
    fn out_of_range_n() {
        let rows = rows_of(3, &[(0, 1), (1, 2)]);
        assert!(dissect(&[0, 1, 2], &rows, 3).is_none());
        assert!(dissect(&[0, 1, 2], &rows, 1).is_none());
        let rows = rows_of(3, &[(0, 1)]);
        assert!(dissect(&[0, 1, 2], &rows, 2).is_none());
    }

    /// Every valid split, by brute force over all subsets.
    fn valid_splits(rows: &[u16], n: usize) -> Vec<Dissection> {
        let k = rows.len();
        let mut ops = 0;
        let mut out = Vec::new();
        for small in 0u16..1 << k {
            if small.count_ones() as usize != n || !connected(rows, small, &mut ops) {
                continue;
            }
            for v in 0..k {
                if small >> v & 1 == 1 {
                    let rest = (full(k) & !small) | 1 << v;
                    if connected(rows, rest, &mut ops) {
                        out.push(Dissection { small, rest });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn exhaustive_up_to_six_vertices() {
        for k in 3..=6usize {
            let pairs: Vec<(usize, usize)> = (0..k)
                .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
                .collect();
            // a fixed non-monotone id assignment exercises the rank mapping
            let vertices: Vec<VertexId> = (0..k as u32).map(|p| (p * 7 + 3) % 11).collect();
            for mask in 0u32..1 << pairs.len() {
                let edges: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let rows = rows_of(k, &edges);
                let mut ops = 0;
                if !connected(&rows, full(k), &mut ops) {
                    continue;
                }
                for n in 2..k {
                    let valid = valid_splits(&rows, n);
                    let (got, ops) = dissect_counted(&vertices, &rows, n);
                    let got = got.unwrap_or_else(|| panic!("no split for {edges:?}, n={n}"));
                    assert!(valid.contains(&got), "{edges:?} n={n} gave {got:?}");
                    if n <= 3 {
                        assert!(ops <= 2 * (k as u64).pow(3), "ops {ops} for k={k}");
                    }
                }
            }
        }
    }
}
