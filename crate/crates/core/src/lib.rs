//! Frequent subgraph mining by joining small subgraphs at a shared vertex.
//!
//! The engine enumerates wedges and triangles, filters them by minimum image
//! support, then grows larger subgraphs with a depth-first multi-way join in
//! which every subgraph is produced by exactly one operand pair.

pub mod canonical;
pub mod driver;
pub mod graph;
pub mod join;
pub mod matcher;
pub mod oracle;
pub mod subgraph_list;
pub mod support;

pub use canonical::{canonicalize, CanonicalCode, CanonicalForm, PatternGraph, TieBreak};
pub use driver::{
    mine, run_fsm, ExplorationMode, MineOptions, MineResult, QuickPatternMode, ReportFormat,
    RunConfig, RunReport, RunStats,
};
pub use graph::{load_graph, LabelSource, LabeledGraph};
pub use matcher::Induce;
pub use support::{PatternStats, SupportThreshold};
