use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Multiset of observed (influencer, influenced) pairs, grouped by cascade.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiffusionDataset {
    pairs: Vec<(usize, usize)>,
    cascade_of: Vec<usize>,
    cascade_labels: Vec<String>,
}

impl DiffusionDataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a dataset from `(cascade label, u, v)` records, rejecting pairs
    /// that are not edges of `graph`.
    pub fn from_records<S: AsRef<str>>(
        graph: &AttributedGraph,
        records: impl IntoIterator<Item = (S, usize, usize)>,
    ) -> Result<Self> {
        let mut ds = Self::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for (label, u, v) in records {
            if !graph.has_edge(u, v) {
                return Err(Error::NotAnEdge(u, v));
            }
            let label = label.as_ref();
            let c = match index.get(label) {
                Some(&c) => c,
                None => {
                    let c = ds.cascade_labels.len();
                    ds.cascade_labels.push(label.to_owned());
                    index.insert(label.to_owned(), c);
                    c
                }
            };
            ds.pairs.push((u, v));
            ds.cascade_of.push(c);
        }
        Ok(ds)
    }

    /// Opens a new cascade and returns its index.
    pub fn begin_cascade(&mut self, label: impl Into<String>) -> usize {
        self.cascade_labels.push(label.into());
        self.cascade_labels.len() - 1
    }

    /// Appends a pair to cascade `cascade`. The caller guarantees `(u, v)` is an edge.
    pub fn push(&mut self, cascade: usize, u: usize, v: usize) {
        debug_assert!(cascade < self.cascade_labels.len());
        self.pairs.push((u, v));
        self.cascade_of.push(cascade);
    }

    pub fn truncate(&mut self, len: usize) {
        self.pairs.truncate(len);
        self.cascade_of.truncate(len);
        let keep = self.cascade_of.last().map_or(0, |&c| c + 1);
        self.cascade_labels.truncate(keep);
    }

    /// Total pair count N (sum of multiplicities).
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn cascade_count(&self) -> usize {
        self.cascade_labels.len()
    }

    pub fn cascade_label(&self, c: usize) -> &str {
        &self.cascade_labels[c]
    }

    /// `(cascade label, u, v)` in insertion order.
    pub fn records(&self) -> impl Iterator<Item = (&str, usize, usize)> + '_ {
        self.pairs
            .iter()
            .zip(&self.cascade_of)
            .map(|(&(u, v), &c)| (self.cascade_labels[c].as_str(), u, v))
    }

    pub fn multiplicities(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for &p in &self.pairs {
            *m.entry(p).or_insert(0) += 1;
        }
        m
    }

    pub fn validate(&self, graph: &AttributedGraph) -> Result<()> {
        match self.pairs.iter().find(|&&(u, v)| !graph.has_edge(u, v)) {
            Some(&(u, v)) => Err(Error::NotAnEdge(u, v)),
            None => Ok(()),
        }
    }
}
