//! Per-community seed selection by centrality.

mod centrality;

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{spectral_cluster, Partition};
use crate::error::{Error, Result};
use crate::graph::{io, AttributedGraph, NodeSet};
use crate::relation::WeightedGraph;

pub use centrality::{
    centrality, closeness, coreness, pagerank, undirected_neighbors, CentralityScores, Measure,
    DAMPING, PAGERANK_MAX_ITERATIONS, PAGERANK_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub node: usize,
    /// Community id, or the pick order's group for selectors without one.
    pub community: usize,
    /// Position within its community, from 0.
    pub rank: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeedSet {
    seeds: Vec<Seed>,
}

impl SeedSet {
    pub fn new(seeds: Vec<Seed>) -> Result<Self> {
        let mut nodes: Vec<usize> = seeds.iter().map(|s| s.node).collect();
        nodes.sort_unstable();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("seed set holds a node twice".into()));
        }
        Ok(Self { seeds })
    }

    /// Nodes in pick order, all in group 0.
    pub fn from_ranked(nodes: &[usize], scores: &[f64]) -> Result<Self> {
        Self::new(
            nodes
                .iter()
                .enumerate()
                .map(|(rank, &node)| Seed {
                    node,
                    community: 0,
                    rank,
                    score: scores.get(rank).copied().unwrap_or(0.0),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn seeds(&self) -> &[Seed] {
        &self.seeds
    }

    /// Nodes in selection order.
    pub fn order(&self) -> Vec<usize> {
        self.seeds.iter().map(|s| s.node).collect()
    }

    pub fn nodes(&self) -> NodeSet {
        NodeSet::new(self.order())
    }

    /// `node community rank score` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for seed in &self.seeds {
            let _ = writeln!(
                s,
                "{} {} {} {}",
                seed.node, seed.community, seed.rank, seed.score
            );
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read(path)?;
        let mut seeds = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `node community rank score`, got `{l}`"),
            };
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad());
            }
            seeds.push(Seed {
                node: f[0].parse().map_err(|_| bad())?,
                community: f[1].parse().map_err(|_| bad())?,
                rank: f[2].parse().map_err(|_| bad())?,
                score: f[3].parse().map_err(|_| bad())?,
            });
        }
        Self::new(seeds)
    }
}

/// Seeds per community for a total budget `k`.
///
/// One each when `k` equals the community count, the `k` largest communities
/// when it is smaller, largest-remainder apportionment by size when larger.
/// Ties go to the larger community, then the lower id.
pub fn allocate_budget(partition: &Partition, k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Parameter("budget must be >= 1".into()));
    }
    let sizes = partition.sizes();
    let c = sizes.len();
    let mut by_size: Vec<usize> = (0..c).collect();
    by_size.sort_by_key(|&i| (std::cmp::Reverse(sizes[i]), i));
    let mut budgets = vec![0; c];
    match k.cmp(&c) {
        Ordering::Equal => budgets.iter_mut().for_each(|b| *b = 1),
        Ordering::Less => by_size[..k].iter().for_each(|&i| budgets[i] = 1),
        Ordering::Greater => {
            let n = partition.node_count();
            // Integer quotas avoid float ties: quota_i = k·size_i / n.
            let mut rem = Vec::with_capacity(c);
            for i in 0..c {
                budgets[i] = k * sizes[i] / n;
                rem.push((k * sizes[i]) % n);
            }
            let left = k - budgets.iter().sum::<usize>();
            let mut order = by_size.clone();
            order.sort_by_key(|&i| (std::cmp::Reverse(rem[i]), std::cmp::Reverse(sizes[i]), i));
            order[..left].iter().for_each(|&i| budgets[i] += 1);
        }
    }
    Ok(budgets)
}

const TIE_GRID: f64 = 1e9;

/// Picks the top `budgets[c]` nodes of each community by centrality on the
/// community's induced subgraph. Ties fall to higher global degree, then
/// lower id.
pub fn select_seeds(
    graph: &AttributedGraph,
    partition: &Partition,
    budgets: &[usize],
    measure: Measure,
) -> Result<SeedSet> {
    if partition.node_count() != graph.node_count() {
        return Err(Error::Dimension(format!(
            "partition covers {} nodes, graph has {}",
            partition.node_count(),
            graph.node_count()
        )));
    }
    if budgets.len() != partition.k() {
        return Err(Error::Dimension(format!(
            "{} budgets for {} communities",
            budgets.len(),
            partition.k()
        )));
    }
    let communities = partition.communities();
    let picks: Vec<Vec<Seed>> = communities
        .par_iter()
        .enumerate()
        .map(|(c, members)| -> Result<Vec<Seed>> {
            if budgets[c] == 0 {
                return Ok(Vec::new());
            }
            let sub = graph.induced_subgraph(members)?;
            let scores = centrality(&sub.graph, measure)?.scores;
            // Iterative scores of symmetric nodes can differ in the last bits;
            // rank on a 1e-9 grid so such nodes fall through to the tie rule.
            let key: Vec<f64> = scores.iter().map(|s| (s * TIE_GRID).round()).collect();
            let mut order: Vec<usize> = (0..members.len()).collect();
            order.sort_by(|&a, &b| {
                let (ga, gb) = (sub.global_id(a), sub.global_id(b));
                key[b]
                    .total_cmp(&key[a])
                    .then(graph.degree(gb).cmp(&graph.degree(ga)))
                    .then(ga.cmp(&gb))
            });
            if budgets[c] > members.len() {
                warn!(
                    "community {c} has {} nodes for a budget of {}",
                    members.len(),
                    budgets[c]
                );
            }
            Ok(order
                .into_iter()
                .take(budgets[c])
                .enumerate()
                .map(|(rank, l)| Seed {
                    node: sub.global_id(l),
                    community: c,
                    rank,
                    score: scores[l],
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    SeedSet::new(picks.into_iter().flatten().collect())
}

/// `k` communities from the weighted graph, budgets allocated by size, top
/// nodes by `measure` inside each.
pub fn community_select(
    graph: &AttributedGraph,
    weighted: &WeightedGraph,
    k: usize,
    measure: Measure,
    seed: u64,
) -> Result<SeedSet> {
    if k == 0 {
        return Ok(SeedSet::default());
    }
    let partition = spectral_cluster(weighted, k, seed)?;
    let budgets = allocate_budget(&partition, k)?;
    select_seeds(graph, &partition, &budgets, measure)
}

#[cfg(test)]
mod tests;
