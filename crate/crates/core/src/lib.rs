//! Data-driven, community-based influence maximization.
//!
//! The pipeline learns how strongly neighbors influence each other from
//! observed diffusion cascades (a graph attention network trained with a
//! skip-gram objective over diffusion chains), partitions the network by
//! normalized-cut spectral clustering on the learned attention weights, and
//! picks seeds per community by a centrality measure.
//!
//! Around it sit ground-truth diffusion models and simulators, exact
//! oracles, comparison baselines and an experiment harness.

#![allow(clippy::needless_range_loop)]

pub mod baselines;
pub mod cascade;
pub mod community;
pub mod diffusion;
pub mod error;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod relation;
pub mod rng;
pub mod seeds;
pub mod stats;

pub use cascade::{
    estimate_influence, exact_influence_oracle, generate_dataset, simulate_cascade, CascadeTrace,
    InfluenceEstimate,
};
pub use diffusion::{edge_probability, make_model, DiffusionModel, ModelKind, PicParams};
pub use error::{Error, Result};
pub use graph::io::{load_attributed_graph, load_diffusion_dataset};
pub use graph::{AttributedGraph, DiffusionDataset, NodeSet};
pub use matrix::Matrix;
