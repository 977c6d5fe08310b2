#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use graphnls::MetricGraph;

pub const ALL_FIXTURES: [&str; 6] = ["interval", "star3", "tadpole", "loop", "fig8", "theta"];
pub const TIP_FIXTURES: [&str; 3] = ["interval", "star3", "tadpole"];
pub const NO_TIP_FIXTURES: [&str; 3] = ["loop", "fig8", "theta"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Arc<MetricGraph> {
    Arc::new(MetricGraph::load(fixture_path(name)).unwrap_or_else(|e| {
        panic!("fixture {name}: {e}");
    }))
}

pub fn min_edge_length(graph: &MetricGraph) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| e.length)
        .fold(f64::INFINITY, f64::min)
}
