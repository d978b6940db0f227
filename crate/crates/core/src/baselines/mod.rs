//! Comparison selectors: random, CELF greedy, embedding k-means (GATK),
//! spectral clustering on unit weights (Spec-PR) and reverse-reachable-set
//! greedy on learned weights (RL-RIS).

mod greedy;
mod ris;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::community::kmeans;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::matrix::{sq_dist, Matrix};
use crate::relation::WeightedGraph;
use crate::rng;
use crate::seeds::{community_select, Measure, Seed, SeedSet};

pub use greedy::{celf_greedy, lazy_greedy, naive_greedy, GreedyTrace};
pub use ris::{default_theta, generate_rr_set, rl_ris_select, RisSelection, RrSet, MAX_THETA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Baseline {
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "celf")]
    Celf,
    #[serde(rename = "gatk")]
    Gatk,
    #[serde(rename = "spec-pr")]
    SpecPr,
    #[serde(rename = "rl-ris")]
    RlRis,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::Random,
        Baseline::Celf,
        Baseline::Gatk,
        Baseline::SpecPr,
        Baseline::RlRis,
    ];

    /// GATK reads learned embeddings and RL-RIS learned weights.
    pub fn needs_training(self) -> bool {
        matches!(self, Baseline::Gatk | Baseline::RlRis)
    }

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::Celf => "celf",
            Baseline::Gatk => "gatk",
            Baseline::SpecPr => "spec-pr",
            Baseline::RlRis => "rl-ris",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "baseline",
                name: s.to_string(),
            })
    }
}

/// `k` nodes uniformly without replacement.
pub fn random_seeds(graph: &AttributedGraph, k: usize, seed: u64) -> Result<SeedSet> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::Parameter(format!("cannot pick {k} of {n} nodes")));
    }
    let picks = index::sample(&mut rng::rng(seed), n, k).into_vec();
    SeedSet::from_ranked(&picks, &[])
}

/// k-means++ on node embeddings; each cluster contributes the node closest
/// to its centroid (lowest id on ties).
pub fn gatk_select(embeddings: &Matrix, k: usize, seed: u64) -> Result<SeedSet> {
    if k == 0 {
        return Ok(SeedSet::default());
    }
    let fit = kmeans(embeddings, k, seed, 10)?;
    let mut best = vec![(usize::MAX, f64::INFINITY); k];
    for (v, row) in embeddings.iter_rows().enumerate() {
        let c = fit.partition.community_of(v);
        let d = sq_dist(row, fit.centroids.row(c));
        if d < best[c].1 {
            best[c] = (v, d);
        }
    }
    SeedSet::new(
        best.into_iter()
            .enumerate()
            .map(|(c, (node, d))| Seed {
                node,
                community: c,
                rank: 0,
                score: d.sqrt(),
            })
            .collect(),
    )
}

/// Spectral clustering on unit edge weights, then one PageRank seed per
/// community.
pub fn spec_pr_select(graph: &AttributedGraph, k: usize, seed: u64) -> Result<SeedSet> {
    community_select(
        graph,
        &WeightedGraph::uniform(graph),
        k,
        Measure::Pagerank,
        seed,
    )
}
