//! Normalized-cut spectral clustering of a weighted graph.

mod kmeans;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use faer::{Mat, Side};
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{io, NodeSet};
use crate::matrix::Matrix;
use crate::relation::WeightedGraph;
use crate::rng;

pub use kmeans::{kmeans, kmeans_pp, KMeansFit, MAX_ITERATIONS, SHIFT_TOLERANCE};

pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Symmetric, nonnegative, zero-diagonal affinity stored by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SimilarityMatrix {
    /// Builds from undirected entries; repeated pairs add up. Zero entries
    /// are dropped.
    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (u, v, w) in entries {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "entry ({u}, {v}) outside {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("diagonal entry at {u}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!("weight {w} at ({u}, {v})")));
            }
            if w > 0.0 {
                *acc[u].entry(v).or_insert(0.0) += w;
                *acc[v].entry(u).or_insert(0.0) += w;
            }
        }
        Ok(Self {
            rows: acc.into_iter().map(|m| m.into_iter().collect()).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, u: usize) -> &[(usize, f64)] {
        &self.rows[u]
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        let row = &self.rows[u];
        row.binary_search_by_key(&v, |&(j, _)| j)
            .map_or(0.0, |i| row[i].1)
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.rows[u].iter().map(|&(_, w)| w).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, w)| (j, w * s)).collect())
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.node_count();
        let mut m = Mat::zeros(n, n);
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, w) in row {
                m[(u, v)] = w;
            }
        }
        m
    }
}

/// S(u,v) = (w(u→v) + w(v→u)) / 2.
pub fn symmetrized_similarity(weighted: &WeightedGraph) -> SimilarityMatrix {
    SimilarityMatrix::from_entries(
        weighted.node_count(),
        weighted.iter().map(|(u, v, w)| (u, v, 0.5 * w)),
    )
    .expect("weighted graphs hold valid nonnegative weights")
}

/// I − D^{-1/2} S D^{-1/2}; isolated nodes keep an identity row.
pub fn normalized_laplacian(s: &SimilarityMatrix) -> Mat<f64> {
    let n = s.node_count();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|u| {
            let d = s.degree(u);
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut l = Mat::identity(n, n);
    for u in 0..n {
        for &(v, w) in s.row(u) {
            l[(u, v)] -= w * inv_sqrt[u] * inv_sqrt[v];
        }
    }
    l
}

#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// n×k, rows scaled to unit length (zero rows stay zero).
    pub rows: Matrix,
    pub eigenvalues: Vec<f64>,
    pub max_residual: f64,
}

/// Eigenvectors of the `k` smallest eigenvalues of a symmetric matrix.
pub fn spectral_embedding(l: &Mat<f64>, k: usize) -> Result<SpectralEmbedding> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::Dimension(format!(
            "{}x{} is not square",
            n,
            l.ncols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Parameter(format!(
            "embedding width {k} for {n} nodes"
        )));
    }
    let eig = l
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver failed: {e:?}")))?;
    // faer returns eigenvalues in nondecreasing order
    let values = eig.S().column_vector();
    let vectors = eig.U().subcols(0, k);
    let residual = l * vectors;
    let mut max_residual: f64 = 0.0;
    for c in 0..k {
        let r: f64 = (0..n)
            .map(|i| (residual[(i, c)] - values[c] * vectors[(i, c)]).powi(2))
            .sum::<f64>()
            .sqrt();
        max_residual = max_residual.max(r);
    }
    if max_residual.is_nan() || max_residual > EIGEN_RESIDUAL_TOLERANCE {
        return Err(Error::Numeric(format!(
            "eigensolver residual {max_residual:.3e} exceeds {EIGEN_RESIDUAL_TOLERANCE:e}"
        )));
    }
    let mut rows = Matrix::from_fn(n, k, |r, c| vectors[(r, c)]);
    for r in 0..n {
        let row = rows.row_mut(r);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(SpectralEmbedding {
        rows,
        eigenvalues: (0..k).map(|c| values[c]).collect(),
        max_residual,
    })
}

/// Node-to-community assignment with every community nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for (v, &c) in assignment.iter().enumerate() {
            if c >= k {
                return Err(Error::Validation(format!(
                    "node {v} in community {c} of {k}"
                )));
            }
            seen[c] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("community {c} is empty")));
        }
        Ok(Self { assignment, k })
    }

    /// Relabels arbitrary ids to 0..k in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = BTreeMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            assignment,
            k: map.len(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        self.assignment.iter().for_each(|&c| s[c] += 1);
        s
    }

    pub fn communities(&self) -> Vec<NodeSet> {
        let mut members = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            members[c].push(v);
        }
        members.into_iter().map(NodeSet::new).collect()
    }

    /// Same grouping, ignoring community ids.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.node_count() == other.node_count()
            && Partition::from_labels(&self.assignment) == Partition::from_labels(&other.assignment)
    }

    /// `node community` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (v, c) in self.assignment.iter().enumerate() {
            let _ = writeln!(s, "{v} {c}");
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read(path)?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `node community`, got `{l}`"),
            };
            let mut f = l.split_whitespace();
            let v: usize = f.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            let c: usize = f.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
            if f.next().is_some() {
                return Err(bad());
            }
            pairs.push((v, c));
        }
        pairs.sort_unstable();
        if pairs.iter().enumerate().any(|(i, &(v, _))| v != i) {
            return Err(Error::Validation(format!(
                "{}: nodes must be listed exactly once from 0",
                path.display()
            )));
        }
        let k = pairs.iter().map(|&(_, c)| c + 1).max().unwrap_or(0);
        Partition::new(pairs.into_iter().map(|(_, c)| c).collect(), k)
    }
}

/// Σ cut(A, V∖A) / vol(A); parts with zero volume contribute 0.
pub fn ncut_score(s: &SimilarityMatrix, partition: &Partition) -> f64 {
    let k = partition.k();
    let mut cut = vec![0.0; k];
    let mut vol = vec![0.0; k];
    for u in 0..s.node_count() {
        let cu = partition.community_of(u);
        for &(v, w) in s.row(u) {
            vol[cu] += w;
            if partition.community_of(v) != cu {
                cut[cu] += w;
            }
        }
    }
    let mut score = 0.0;
    for c in 0..k {
        if vol[c] > 0.0 {
            score += cut[c] / vol[c];
        } else {
            warn!("community {c} has zero volume");
        }
    }
    score
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterOptions {
    pub restarts: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self { restarts: 10 }
    }
}

pub fn spectral_cluster(weighted: &WeightedGraph, k: usize, seed: u64) -> Result<Partition> {
    cluster_similarity(
        &symmetrized_similarity(weighted),
        k,
        seed,
        &ClusterOptions::default(),
    )
}

/// Spectral clustering of a prepared affinity matrix into exactly `k`
/// communities.
///
/// Zero-degree nodes are left out of k-means when enough connected nodes
/// remain and join the nearest centroid afterwards (community 0 for an all-zero
/// embedding row).
pub fn cluster_similarity(
    s: &SimilarityMatrix,
    k: usize,
    seed: u64,
    opts: &ClusterOptions,
) -> Result<Partition> {
    let n = s.node_count();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!(
            "cannot split {n} nodes into {k} communities"
        )));
    }
    if k == 1 {
        return Partition::new(vec![0; n], 1);
    }
    let emb = spectral_embedding(&normalized_laplacian(s), k)?;
    let connected: Vec<usize> = (0..n).filter(|&u| !s.row(u).is_empty()).collect();
    let seed = rng::stage(seed, "kmeans");
    if connected.len() < k || connected.len() == n {
        return kmeans_pp(&emb.rows, k, seed, opts.restarts);
    }
    let fit = kmeans(&emb.rows.select_rows(&connected), k, seed, opts.restarts)?;
    let mut assignment = vec![0usize; n];
    for (i, &u) in connected.iter().enumerate() {
        assignment[u] = fit.partition.community_of(i);
    }
    let mut isolated = 0;
    for u in (0..n).filter(|&u| s.row(u).is_empty()) {
        let row = emb.rows.row(u);
        if row.iter().any(|&x| x != 0.0) {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in fit.centroids.iter_rows().enumerate() {
                let d = crate::matrix::sq_dist(row, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            assignment[u] = best.0;
        }
        isolated += 1;
    }
    debug!("{isolated} isolated nodes attached after clustering");
    Partition::new(assignment, k)
}

/// Size below which a community counts as tiny.
pub fn tiny_threshold(n: usize, k: usize) -> usize {
    2.max(n / (10 * k.max(1)))
}

/// Merges communities smaller than `min_size` into the neighbor community with
/// the largest connecting weight (the largest community when unconnected),
/// smallest first, while more than `min_communities` remain. Surviving ids are
/// renumbered in their original order.
pub fn merge_tiny_communities(
    s: &SimilarityMatrix,
    partition: &Partition,
    min_size: usize,
    min_communities: usize,
) -> Partition {
    let mut assignment = partition.assignment().to_vec();
    let mut alive: Vec<bool> = vec![true; partition.k()];
    loop {
        let mut sizes = vec![0usize; alive.len()];
        assignment.iter().for_each(|&c| sizes[c] += 1);
        let live = alive.iter().filter(|&&a| a).count();
        if live <= min_communities.max(1) {
            break;
        }
        let Some(tiny) = (0..alive.len())
            .filter(|&c| alive[c] && sizes[c] < min_size)
            .min_by_key(|&c| (sizes[c], c))
        else {
            break;
        };
        let mut link = vec![0.0; alive.len()];
        for u in (0..assignment.len()).filter(|&u| assignment[u] == tiny) {
            for &(v, w) in s.row(u) {
                link[assignment[v]] += w;
            }
        }
        let others = (0..alive.len()).filter(|&c| alive[c] && c != tiny);
        let target = if others.clone().any(|c| link[c] > 0.0) {
            others.fold(usize::MAX, |b, c| {
                if b == usize::MAX || link[c] > link[b] {
                    c
                } else {
                    b
                }
            })
        } else {
            others.fold(usize::MAX, |b, c| {
                if b == usize::MAX || sizes[c] > sizes[b] {
                    c
                } else {
                    b
                }
            })
        };
        assignment
            .iter_mut()
            .filter(|c| **c == tiny)
            .for_each(|c| *c = target);
        alive[tiny] = false;
    }
    let mut renumber = vec![usize::MAX; alive.len()];
    let mut next = 0;
    for c in 0..alive.len() {
        if alive[c] {
            renumber[c] = next;
            next += 1;
        }
    }
    let merged = assignment.iter().map(|&c| renumber[c]).collect();
    Partition::new(merged, next).expect("merging keeps communities nonempty")
}
