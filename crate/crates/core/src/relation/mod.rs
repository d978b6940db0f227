//! Relation learning: a graph attention network trained with a skip-gram
//! objective over diffusion chains, whose attention coefficients become edge
//! weights.

pub mod chains;
pub mod gat;
pub mod skipgram;
mod train;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{io, AttributedGraph};
use crate::matrix::Matrix;

pub use chains::{build_chains, ChainCorpus};
pub use gat::{Architecture, AttentionModel, Neighborhoods};
pub use skipgram::{skipgram_loss, skipgram_objective, SkipGramBatch};
pub use train::{end_to_end_loss, train_relation_model, TrainConfig, TrainedRelationModel};

/// Final-layer node embeddings.
pub fn embed(model: &AttentionModel, graph: &AttributedGraph) -> Result<Matrix> {
    Ok(model
        .forward(&Neighborhoods::new(graph), graph.features())?
        .embeddings)
}

/// Per-edge weights over a graph's edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    /// Attention each node keeps on itself; empty for non-attention weights.
    self_mass: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(graph: &AttributedGraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != graph.edge_count() {
            return Err(Error::Dimension(format!(
                "{} weights for {} edges",
                weights.len(),
                graph.edge_count()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Validation(
                "edge weights must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            node_count: graph.node_count(),
            edges: graph.edges().to_vec(),
            weights,
            self_mass: Vec::new(),
        })
    }

    /// Every edge weighted 1.
    pub fn uniform(graph: &AttributedGraph) -> Self {
        Self::new(graph, vec![1.0; graph.edge_count()]).expect("uniform weights are valid")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn self_mass(&self) -> &[f64] {
        &self.self_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges
            .iter()
            .zip(&self.weights)
            .map(|(&(u, v), &w)| (u, v, w))
    }

    /// `src dst weight` lines, 9 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (u, v, w) in self.iter() {
            let _ = writeln!(s, "{u} {v} {}", format_significant(w, 9));
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write(path, &self.to_text())
    }

    pub fn load(path: &Path, graph: &AttributedGraph) -> Result<Self> {
        let text = io::read(path)?;
        let mut weights = vec![f64::NAN; graph.edge_count()];
        for (i, line) in text.lines().enumerate() {
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `src dst weight`, got `{l}`"),
            };
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad());
            }
            let u: usize = f[0].parse().map_err(|_| bad())?;
            let v: usize = f[1].parse().map_err(|_| bad())?;
            let w: f64 = f[2].parse().map_err(|_| bad())?;
            let e = graph.edge_id(u, v).ok_or(Error::NotAnEdge(u, v))?;
            weights[e] = w;
        }
        if let Some(e) = weights.iter().position(|w| w.is_nan()) {
            let (u, v) = graph.edge(e);
            return Err(Error::Validation(format!("no weight for edge ({u}, {v})")));
        }
        Self::new(graph, weights)
    }
}

/// Decimal notation with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Attention-derived weight of every edge `(u -> v)`: the final-layer
/// coefficient target `v` assigns to `u`, averaged over heads.
pub fn extract_edge_weights(
    model: &AttentionModel,
    graph: &AttributedGraph,
) -> Result<WeightedGraph> {
    let nb = Neighborhoods::new(graph);
    let pass = model.forward(&nb, graph.features())?;
    let attention = pass.attention();
    let last = attention.last().expect("model has layers");
    let scale = 1.0 / last.len() as f64;
    let mut weights = vec![0.0; graph.edge_count()];
    let mut self_mass = vec![0.0; graph.node_count()];
    let in_adj = graph.in_adj();
    for v in 0..graph.node_count() {
        let r = nb.range(v);
        for head in last {
            self_mass[v] += scale * head[r.start];
            // slots after the self-loop follow in_adj order
            for (k, &e) in in_adj.edge_ids(v).iter().enumerate() {
                weights[e] += scale * head[r.start + 1 + k];
            }
        }
    }
    let mut wg = WeightedGraph::new(graph, weights)?;
    wg.self_mass = self_mass;
    Ok(wg)
}

impl AttentionModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: AttentionModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write(path, &self.to_json()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&io::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::{community_graph, SyntheticGraphConfig};
    use crate::rng;
    use proptest::prelude::*;

    #[test]
    fn single_in_neighbor_with_equal_logits() {
        let g = AttributedGraph::with_degree_features(2, vec![(0, 1)]).unwrap();
        let mut m = AttentionModel::init(1, &Architecture::default(), &mut rng::rng(1)).unwrap();
        for l in &mut m.layers {
            for h in &mut l.heads {
                h.a.fill(0.0);
            }
        }
        let wg = extract_edge_weights(&m, &g).unwrap();
        assert!((wg.weights()[0] - 0.5).abs() < 1e-15);
        assert!((wg.self_mass()[1] - 0.5).abs() < 1e-15);
        assert_eq!(wg.self_mass()[0], 1.0);
    }

    #[test]
    fn weights_and_self_mass_sum_to_one() {
        let g = community_graph(&SyntheticGraphConfig::default(), 2).unwrap();
        let m = AttentionModel::init(g.feature_dim(), &Architecture::default(), &mut rng::rng(4))
            .unwrap();
        let wg = extract_edge_weights(&m, &g).unwrap();
        let mut sums = wg.self_mass().to_vec();
        for (_, v, w) in wg.iter() {
            assert!(w > 0.0 && w <= 1.0);
            sums[v] += w;
        }
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-6));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.123456789123, 9), "0.123456789");
        assert_eq!(format_significant(1.0, 9), "1.00000000");
        assert_eq!(format_significant(0.00012345678912, 9), "0.000123456789");
    }

    #[test]
    fn weight_file_round_trip() {
        let g = AttributedGraph::undirected(3, &[(0, 1), (1, 2)]).unwrap();
        let wg = WeightedGraph::new(&g, vec![0.25, 0.5, 0.125, 1.0 / 3.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.txt");
        wg.save(&p).unwrap();
        let back = WeightedGraph::load(&p, &g).unwrap();
        for (a, b) in back.weights().iter().zip(wg.weights()) {
            assert!((a - b).abs() <= 1e-9 * b);
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = AttentionModel::init(3, &Architecture::default(), &mut rng::rng(9)).unwrap();
        assert_eq!(AttentionModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn permutation_equivariance(seed in 0u64..1000, perm_seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            let cfg = SyntheticGraphConfig { nodes: 30, blocks: 3, feature_dim: 3, ..Default::default() };
            let g = community_graph(&cfg, seed).unwrap();
            let n = g.node_count();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng::rng(perm_seed));
            let edges: Vec<_> = g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
            let mut x = Matrix::zeros(n, g.feature_dim());
            for v in 0..n {
                x.row_mut(perm[v]).copy_from_slice(g.features().row(v));
            }
            let pg = AttributedGraph::new(n, edges, x).unwrap();
            let m = AttentionModel::init(g.feature_dim(), &Architecture::default(), &mut rng::rng(seed)).unwrap();

            let z = embed(&m, &g).unwrap();
            let pz = embed(&m, &pg).unwrap();
            for v in 0..n {
                for (a, b) in z.row(v).iter().zip(pz.row(perm[v])) {
                    prop_assert!((a - b).abs() < 1e-10);
                }
            }
            let w = extract_edge_weights(&m, &g).unwrap();
            let pw = extract_edge_weights(&m, &pg).unwrap();
            // edge e of g maps to edge e of pg
            for (a, b) in w.weights().iter().zip(pw.weights()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
