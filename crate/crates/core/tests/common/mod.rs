#![allow(dead_code)]

use std::collections::BTreeMap;

use fsm_core::canonical::CanonicalCode;
use fsm_core::driver::{mine, ExplorationMode, MineOptions};
use fsm_core::graph::LabeledGraph;
use fsm_core::matcher::Induce;
use fsm_core::oracle::oracle_fsm;
use fsm_core::support::SupportThreshold;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random labeled graph with `|V| <= 30`, `|E| <= 90` and 1 to 4 labels.
pub fn random_graph(seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(6..=30usize);
    let max_edges = (n * (n - 1) / 2).min(90);
    let m = rng.gen_range(n - 1..=max_edges.min(3 * n));
    let labels = rng.gen_range(1..=4u32);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.gen_range(0..n as u32);
        let b = rng.gen_range(0..n as u32);
        if a != b {
            edges.push((a, b));
        }
    }
    let l = (0..n).map(|_| rng.gen_range(0..labels)).collect();
    LabeledGraph::from_edges(n, &edges, l).unwrap()
}

/// Smaller, sparser graphs for the costliest sizes.
pub fn small_graph(seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(6..=16usize);
    let m = rng.gen_range(n - 1..=2 * n);
    let labels = rng.gen_range(1..=4u32);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.gen_range(0..n as u32);
        let b = rng.gen_range(0..n as u32);
        if a != b {
            edges.push((a, b));
        }
    }
    let l = (0..n).map(|_| rng.gen_range(0..labels)).collect();
    LabeledGraph::from_edges(n, &edges, l).unwrap()
}

pub type Table = BTreeMap<CanonicalCode, usize>;

pub fn engine(g: &LabeledGraph, s: usize, t: usize, f: impl FnOnce(&mut MineOptions)) -> Table {
    let mut o = MineOptions::new(s, SupportThreshold::Absolute(t), ExplorationMode::TwoVertex);
    o.verify_quick_patterns = true;
    f(&mut o);
    let r = mine(g, &o).unwrap();
    assert_eq!(
        r.counters.quick_pattern_mismatches, 0,
        "quick pattern soundness"
    );
    r.patterns
        .into_iter()
        .map(|p| (p.code, p.support))
        .collect()
}

pub fn oracle(g: &LabeledGraph, s: usize, t: usize, induce: Induce) -> Table {
    oracle_fsm(g, s, induce)
        .unwrap()
        .into_iter()
        .filter(|&(_, sup)| sup >= t)
        .collect()
}

/// Preferential attachment: each new vertex links to `m` distinct earlier
/// vertices chosen proportionally to degree.
pub fn power_law_graph(n: usize, m: usize, uniform: f64, labels: u32, seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ends: Vec<u32> = Vec::new();
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        let mut picked = Vec::new();
        while picked.len() < m.min(v as usize) {
            let u = if ends.is_empty() || rng.gen_bool(uniform) {
                rng.gen_range(0..v)
            } else {
                ends[rng.gen_range(0..ends.len())]
            };
            if !picked.contains(&u) {
                picked.push(u);
            }
        }
        for u in picked {
            edges.push((u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    let l = (0..n).map(|_| rng.gen_range(0..labels)).collect();
    LabeledGraph::from_edges(n, &edges, l).unwrap()
}
