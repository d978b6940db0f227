//! Synthetic attributed social graphs with planted communities.
//!
//! Degree-corrected planted partition: node `i` carries a heavy-tailed
//! propensity `theta_i`; an unordered pair is linked with probability
//! proportional to `theta_i * theta_j`, boosted inside a block and damped
//! across blocks. Features are a per-block Gaussian centroid plus noise, so
//! attributes correlate with community membership.

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{symmetrize_pairs, AttributedGraph};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticGraphConfig {
    pub nodes: usize,
    pub blocks: usize,
    /// Expected undirected degree.
    pub avg_degree: f64,
    /// Fraction of a node's expected edges that leave its block.
    pub mixing: f64,
    /// Pareto shape of the degree propensities; larger is more homogeneous.
    pub degree_shape: f64,
    pub feature_dim: usize,
    /// Scale of the per-block feature centroids relative to unit noise.
    pub feature_separation: f64,
}

impl Default for SyntheticGraphConfig {
    fn default() -> Self {
        Self {
            nodes: 300,
            blocks: 10,
            avg_degree: 8.0,
            mixing: 0.15,
            degree_shape: 2.5,
            feature_dim: 8,
            feature_separation: 1.0,
        }
    }
}

pub fn community_graph(cfg: &SyntheticGraphConfig, seed: u64) -> Result<AttributedGraph> {
    let n = cfg.nodes;
    let c = cfg.blocks.max(1);
    if n < 2 || c > n || cfg.feature_dim == 0 {
        return Err(Error::Parameter(format!(
            "synthetic graph needs nodes >= 2, 1 <= blocks <= nodes, feature_dim >= 1 (got {n}, {c}, {})",
            cfg.feature_dim
        )));
    }
    if !(0.0..=1.0).contains(&cfg.mixing) || cfg.avg_degree <= 0.0 || cfg.degree_shape <= 1.0 {
        return Err(Error::Parameter(
            "mixing must be in [0,1], avg_degree > 0, degree_shape > 1".into(),
        ));
    }
    let mut r = rng::rng(seed);
    let block: Vec<usize> = (0..n).map(|i| i * c / n).collect();
    let pareto = Pareto::new(1.0, cfg.degree_shape).expect("valid pareto");
    let theta: Vec<f64> = (0..n).map(|_| pareto.sample(&mut r)).collect();

    let mut block_mass = vec![0.0; c];
    for i in 0..n {
        block_mass[block[i]] += theta[i];
    }
    let total: f64 = block_mass.iter().sum();

    // Expected degree of i is approximately avg_degree * theta_i / mean(theta),
    // split (1 - mixing) inside the block and `mixing` outside.
    let mean_theta = total / n as f64;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (bi, bj) = (block[i], block[j]);
            let share = if bi == bj {
                (1.0 - cfg.mixing) / block_mass[bi]
            } else if c > 1 {
                cfg.mixing / (total - block_mass[bi])
            } else {
                0.0
            };
            let p = (cfg.avg_degree * theta[i] * theta[j] / mean_theta * share).min(1.0);
            if r.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }

    let d = cfg.feature_dim;
    let centroids = Matrix::from_fn(c, d, |_, _| {
        cfg.feature_separation * Distribution::<f64>::sample(&StandardNormal, &mut r)
    });
    let x = Matrix::from_fn(n, d, |i, j| {
        centroids.get(block[i], j) + Distribution::<f64>::sample(&StandardNormal, &mut r)
    });
    AttributedGraph::new(n, symmetrize_pairs(&pairs), x)
}

/// Planted block of each node in [`community_graph`].
pub fn planted_blocks(cfg: &SyntheticGraphConfig) -> Vec<usize> {
    let c = cfg.blocks.max(1);
    (0..cfg.nodes).map(|i| i * c / cfg.nodes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_roughly_calibrated() {
        let cfg = SyntheticGraphConfig::default();
        let a = community_graph(&cfg, 1).unwrap();
        let b = community_graph(&cfg, 1).unwrap();
        assert_eq!(a, b);
        let avg = a.edge_count() as f64 / a.node_count() as f64;
        assert!((4.0..14.0).contains(&avg), "avg undirected degree {avg}");
        let blocks = planted_blocks(&cfg);
        let inside = a
            .edges()
            .iter()
            .filter(|&&(u, v)| blocks[u] == blocks[v])
            .count();
        assert!(inside as f64 > 0.6 * a.edge_count() as f64);
    }
}
