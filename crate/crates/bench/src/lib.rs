//! Shared fixtures for the benchmarks.

use dscom_core::graph::synthetic::{community_graph, SyntheticGraphConfig};
use dscom_core::relation::WeightedGraph;
use dscom_core::{make_model, AttributedGraph, DiffusionModel, ModelKind};

pub struct Fixture {
    pub graph: AttributedGraph,
    pub model: DiffusionModel,
    /// Ground-truth edge values as weights, standing in for learned ones.
    pub weights: WeightedGraph,
}

/// Synthetic community graph with a calibrated PIC model.
pub fn fixture(nodes: usize) -> Fixture {
    let cfg = SyntheticGraphConfig {
        nodes,
        blocks: (nodes / 30).max(2),
        ..SyntheticGraphConfig::default()
    };
    let graph = community_graph(&cfg, 7).expect("synthetic graph");
    let model = make_model(ModelKind::Pic, &graph, 8, 0.1).expect("model");
    let weights = WeightedGraph::new(&graph, model.edge_values().to_vec()).expect("weights");
    Fixture {
        graph,
        model,
        weights,
    }
}
