mod common;

use std::fs;

use common::*;
use fsm_core::canonical::{canonicalize, PatternGraph, TieBreak};
use fsm_core::driver::{mine, ExplorationMode, MineError, MineOptions};
use fsm_core::matcher::Induce;
use fsm_core::support::SupportThreshold;

#[test]
fn tie_break_keeps_supports() {
    for seed in 0..40u64 {
        let g = random_graph(seed);
        for s in [4usize, 5] {
            let first = engine(&g, s, 2, |_| {});
            let last = engine(&g, s, 2, |o| o.tie = TieBreak::Last);
            assert_eq!(first, last, "seed {seed} s {s}");
        }
    }
}

fn dropped(p: &PatternGraph, v: usize) -> Option<PatternGraph> {
    let keep: Vec<usize> = (0..p.size()).filter(|&x| x != v).collect();
    let labels = keep.iter().map(|&x| p.labels()[x]).collect();
    let edges: Vec<(usize, usize)> = p
        .edges()
        .into_iter()
        .filter(|&(a, b)| a != v && b != v)
        .map(|(a, b)| {
            (
                keep.iter().position(|&x| x == a).unwrap(),
                keep.iter().position(|&x| x == b).unwrap(),
            )
        })
        .collect();
    PatternGraph::new(labels, &edges)
        .ok()
        .filter(|q| q.is_connected())
}

#[test]
fn support_is_anti_monotone() {
    for seed in 0..60u64 {
        let g = random_graph(seed);
        for s in [3usize, 4, 5] {
            let smaller = engine(&g, s, 1, |_| {});
            for (code, sup) in engine(&g, s + 1, 1, |_| {}) {
                let p = code.to_pattern().unwrap();
                for v in 0..p.size() {
                    // vertex-deleted subgraphs of an embedding are embeddings
                    // of the smaller pattern
                    let Some(q) = dropped(&p, v) else { continue };
                    let qc = canonicalize(&q).unwrap().code;
                    let sub = smaller.get(&qc).copied().unwrap_or(0);
                    assert!(
                        sub >= sup,
                        "seed {seed}: {} has {sup}, sub-pattern {sub}",
                        code.to_hex()
                    );
                }
            }
        }
    }
}

#[test]
fn size3_cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("fsm-cache-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    let g = random_graph(7);
    let mut o = MineOptions::new(5, SupportThreshold::Absolute(2), ExplorationMode::TwoVertex);
    let plain = mine(&g, &o).unwrap().patterns;
    o.cache_dir = Some(dir.clone());
    let cold = mine(&g, &o).unwrap().patterns;
    let files: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(files.len(), 1);
    let warm = mine(&g, &o).unwrap().patterns;
    assert_eq!(plain, cold);
    assert_eq!(plain, warm);
    // a different graph does not reuse the file
    mine(&random_graph(8), &o).unwrap();
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 2);
    // a damaged file is reported, not trusted
    let mut bytes = fs::read(&files[0]).unwrap();
    bytes.truncate(bytes.len() - 1);
    fs::write(&files[0], bytes).unwrap();
    assert!(matches!(mine(&g, &o), Err(MineError::Cache { .. })));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn edge_semantics_dominates_vertex_semantics() {
    // every vertex-induced embedding is also an edge-induced one
    for seed in 0..30u64 {
        let g = random_graph(seed);
        for s in [4usize, 5] {
            let v = engine(&g, s, 1, |o| o.induce = Induce::Vertex);
            let e = engine(&g, s, 1, |_| {});
            for (code, sup) in &v {
                assert!(e.get(code).is_some_and(|es| es >= sup), "seed {seed} s {s}");
            }
        }
    }
}

#[test]
fn counters_are_consistent() {
    for seed in 0..30u64 {
        let g = random_graph(seed);
        let r = mine(
            &g,
            &MineOptions::new(5, SupportThreshold::Absolute(1), ExplorationMode::TwoVertex),
        )
        .unwrap();
        let j = &r.counters.join;
        // at t=1 every pattern is frequent, so nothing is pruned
        assert_eq!(j.pruned, 0);
        assert!(j.combine_calls >= j.overlap_rejects);
        assert_eq!(j.outputs, j.candidates - j.dissection_rejects);
        let total: u64 = r.patterns.iter().map(|p| p.embeddings).sum();
        assert_eq!(total, j.outputs, "t=1 keeps every output");
        assert!(r.counters.hash_probe_bytes > 0 || g.edge_count() == 0);
    }
}
