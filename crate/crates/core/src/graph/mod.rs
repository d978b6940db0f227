//! Attributed directed graphs, node sets and diffusion datasets.

mod dataset;
pub mod io;
pub mod synthetic;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use dataset::DiffusionDataset;

/// Compressed adjacency: for each node, its neighbors sorted by id together
/// with the ids of the connecting edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

impl Adjacency {
    fn build(n: usize, edges: &[(usize, usize)], outgoing: bool) -> Self {
        let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            if outgoing {
                buckets[u].push((v, id));
            } else {
                buckets[v].push((u, id));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut nodes = Vec::with_capacity(edges.len());
        let mut ids = Vec::with_capacity(edges.len());
        offsets.push(0);
        for mut b in buckets {
            b.sort_unstable();
            for (w, id) in b {
                nodes.push(w);
                ids.push(id);
            }
            offsets.push(nodes.len());
        }
        Self {
            offsets,
            nodes,
            edges: ids,
        }
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nodes[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edge ids parallel to [`Adjacency::neighbors`].
    #[inline]
    pub fn edge_ids(&self, v: usize) -> &[usize] {
        &self.edges[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}

/// Directed graph with a real-valued feature row per node.
///
/// Node ids are dense in `[0, n)`. The stored edge list has no duplicates and
/// no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    features: Matrix,
    out_adj: Adjacency,
    in_adj: Adjacency,
}

impl AttributedGraph {
    pub fn new(node_count: usize, edges: Vec<(usize, usize)>, features: Matrix) -> Result<Self> {
        if features.rows() != node_count {
            return Err(Error::Dimension(format!(
                "feature matrix has {} rows for {} nodes",
                features.rows(),
                node_count
            )));
        }
        if features.cols() == 0 {
            return Err(Error::Dimension("feature matrix has no columns".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= node_count || v >= node_count {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) has an endpoint outside [0, {node_count})"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop on node {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::Validation(format!("duplicate edge ({u}, {v})")));
            }
        }
        if !features.is_finite() {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        let out_adj = Adjacency::build(node_count, &edges, true);
        let in_adj = Adjacency::build(node_count, &edges, false);
        Ok(Self {
            node_count,
            edges,
            features,
            out_adj,
            in_adj,
        })
    }

    /// Graph whose single feature column is the total degree scaled to [0, 1].
    pub fn with_degree_features(node_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut deg = vec![0.0f64; node_count];
        for &(u, v) in &edges {
            if u < node_count && v < node_count {
                deg[u] += 1.0;
                deg[v] += 1.0;
            }
        }
        let max = deg.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            deg.iter_mut().for_each(|d| *d /= max);
        }
        Self::new(node_count, edges, Matrix::from_vec(node_count, 1, deg))
    }

    /// Expands each unordered pair into both directed edges.
    pub fn undirected(node_count: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::with_degree_features(node_count, symmetrize_pairs(pairs))
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    #[inline]
    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    #[inline]
    pub fn out_adj(&self) -> &Adjacency {
        &self.out_adj
    }

    #[inline]
    pub fn in_adj(&self) -> &Adjacency {
        &self.in_adj
    }

    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        self.out_adj.neighbors(v)
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        self.in_adj.neighbors(v)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_adj.degree(v)
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj.degree(v)
    }

    /// Out-degree plus in-degree.
    pub fn degree(&self, v: usize) -> usize {
        self.out_adj.degree(v) + self.in_adj.degree(v)
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.node_count {
            return None;
        }
        let nbrs = self.out_adj.neighbors(u);
        nbrs.binary_search(&v)
            .ok()
            .map(|i| self.out_adj.edge_ids(u)[i])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Replaces the feature matrix.
    pub fn with_features(self, features: Matrix) -> Result<Self> {
        Self::new(self.node_count, self.edges, features)
    }

    /// Keeps only edges whose endpoints are both in `nodes`. Nodes are
    /// renumbered in ascending original-id order.
    pub fn induced_subgraph(&self, nodes: &NodeSet) -> Result<Subgraph> {
        if nodes.is_empty() {
            return Err(Error::Empty("node set"));
        }
        nodes.validate(self.node_count)?;
        let original = nodes.as_slice().to_vec();
        let mut edges = Vec::new();
        for (new_u, &u) in original.iter().enumerate() {
            for &v in self.out_neighbors(u) {
                if let Ok(new_v) = original.binary_search(&v) {
                    edges.push((new_u, new_v));
                }
            }
        }
        let features = self.features.select_rows(&original);
        let graph = AttributedGraph::new(original.len(), edges, features)?;
        Ok(Subgraph { graph, original })
    }
}

/// Unordered pairs to both directed edges, dropping self-loops and duplicates.
pub fn symmetrize_pairs(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(pairs.len() * 2);
    for &(u, v) in pairs {
        if u == v {
            continue;
        }
        for e in [(u, v), (v, u)] {
            if seen.insert(e) {
                out.push(e);
            }
        }
    }
    out
}

/// An induced subgraph together with its local → original id map.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: AttributedGraph,
    /// `original[local] = global id`, ascending.
    pub original: Vec<usize>,
}

impl Subgraph {
    pub fn local_id(&self, global: usize) -> Option<usize> {
        self.original.binary_search(&global).ok()
    }

    pub fn global_id(&self, local: usize) -> usize {
        self.original[local]
    }
}

/// Sorted, duplicate-free set of node ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(nodes: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn all(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&m) if m >= n => Err(Error::Validation(format!("node {m} outside [0, {n})"))),
            _ => Ok(()),
        }
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::new(iter)
    }
}
