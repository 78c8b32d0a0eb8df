//! Properties exercised by the fuzz targets and replayed over the checked-in
//! corpus by `cargo test`.

// each fuzz binary uses one of these
#![allow(dead_code)]

use fsm_core::canonical::{canonicalize, CanonicalCode};
use fsm_core::graph::{labels_from_pairs, parse_edge_list, parse_label_file, LabeledGraph};
use fsm_core::subgraph_list::SubgraphList;
use fsm_core::SupportThreshold;

/// Largest vertex id for which a parsed input is also built into a graph.
const BUILD_LIMIT: u32 = 1 << 12;

pub fn edge_list(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(edges) = parse_edge_list(text) else {
        return;
    };
    let Some(max) = edges.iter().map(|&(u, v)| u.max(v)).max() else {
        return;
    };
    if max >= BUILD_LIMIT {
        return;
    }
    let n = max as usize + 1;
    let Ok(g) = LabeledGraph::from_edges(n, &edges, vec![0; n]) else {
        return;
    };
    for &(u, v) in &edges {
        assert!(u == v || (g.has_edge(u, v) && g.has_edge(v, u)));
    }
    assert!(g.edge_count() <= edges.len());
    let again = parse_edge_list(&g.to_edge_list_text()).expect("rendered edges parse");
    let h = LabeledGraph::from_edges(n, &again, vec![0; n]).expect("rendered edges build");
    assert_eq!(g, h);
}

pub fn label_file(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(pairs) = parse_label_file(text) else {
        return;
    };
    let Some(max) = pairs.iter().map(|&(v, _)| v).max() else {
        return;
    };
    if max >= BUILD_LIMIT {
        return;
    }
    let n = max as usize + 1;
    let Ok(labels) = labels_from_pairs(n, &pairs) else {
        return;
    };
    let g = LabeledGraph::from_edges(n, &[], labels).expect("no edges to check");
    let again = parse_label_file(&g.to_label_text()).expect("rendered labels parse");
    assert_eq!(labels_from_pairs(n, &again).unwrap(), g.labels());
}

pub fn subgraph_list_decode(data: &[u8]) {
    let Ok(list) = SubgraphList::decode_bounded(data, BUILD_LIMIT as usize) else {
        return;
    };
    let bytes = list.encode();
    assert_eq!(
        SubgraphList::decode(&bytes).expect("own encoding decodes"),
        list
    );
    for c in 0..list.arity() {
        let col = list.column(c);
        let total: usize = col.keys().iter().map(|&v| col.group(v).len()).sum();
        assert_eq!(total, list.len());
    }
}

pub fn canonical_hex(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(code) = CanonicalCode::from_hex(text.trim()) else {
        return;
    };
    assert_eq!(code.to_hex(), text.trim().to_ascii_lowercase());
    let p = code.to_pattern().expect("accepted codes decode");
    let Ok(form) = canonicalize(&p) else { return };
    // canonicalizing is idempotent on its own output
    let p2 = form.code.to_pattern().unwrap();
    assert_eq!(canonicalize(&p2).unwrap().code, form.code);
}

pub fn support_threshold(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(t) = text.parse::<SupportThreshold>() else {
        return;
    };
    let again: SupportThreshold = t.to_string().parse().expect("rendered threshold parses");
    assert_eq!(again, t);
    for n in [0usize, 1, 7, 1000] {
        assert!(t.resolve(n) >= 1);
    }
}
