use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DiffusionDataset;
use crate::rng;

/// Diffusion chains: node sequences in which every consecutive pair is an
/// observed diffusion pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainCorpus {
    pub chains: Vec<Vec<usize>>,
}

/// Weighted walker over the diffusion-pair multigraph: from `u` it steps to
/// `v` with probability proportional to the multiplicity of `(u, v)`.
#[derive(Debug, Clone)]
pub struct ChainWalker {
    next: BTreeMap<usize, (Vec<usize>, Vec<usize>)>,
}

impl ChainWalker {
    pub fn new(dataset: &DiffusionDataset) -> Self {
        let mut next: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        let mut acc: BTreeMap<usize, usize> = BTreeMap::new();
        for ((u, v), m) in dataset.multiplicities() {
            let total = acc.entry(u).or_insert(0);
            *total += m;
            let e = next.entry(u).or_default();
            e.0.push(v);
            e.1.push(*total);
        }
        Self { next }
    }

    pub fn step<R: Rng>(&self, u: usize, rng: &mut R) -> Option<usize> {
        let (targets, cumulative) = self.next.get(&u)?;
        let total = *cumulative.last()?;
        let t = rng.random_range(0..total);
        let i = cumulative.partition_point(|&c| c <= t);
        Some(targets[i])
    }

    /// Walk from `start` until `max_len` nodes or a sink.
    pub fn walk_from<R: Rng>(&self, start: usize, max_len: usize, rng: &mut R) -> Vec<usize> {
        let mut chain = vec![start];
        self.extend(&mut chain, max_len, rng);
        chain
    }

    fn extend<R: Rng>(&self, chain: &mut Vec<usize>, max_len: usize, rng: &mut R) {
        while chain.len() < max_len {
            match self.step(*chain.last().expect("non-empty chain"), rng) {
                Some(v) => chain.push(v),
                None => break,
            }
        }
    }
}

/// For every observed pair `(u, v)`, emits `walks_per_pair` chains that start
/// with `[u, v]` and continue as a weighted walk from `v`.
pub fn build_chains(
    dataset: &DiffusionDataset,
    walks_per_pair: usize,
    max_len: usize,
    rng_seed: u64,
) -> Result<ChainCorpus> {
    if dataset.is_empty() {
        return Err(Error::Empty("diffusion dataset"));
    }
    let walker = ChainWalker::new(dataset);
    let mut r = rng::rng(rng_seed);
    let mut chains = Vec::with_capacity(dataset.len() * walks_per_pair.max(1));
    for &(u, v) in dataset.pairs() {
        for _ in 0..walks_per_pair.max(1) {
            let mut chain = vec![u, v];
            walker.extend(&mut chain, max_len.max(2), &mut r);
            chains.push(chain);
        }
    }
    Ok(ChainCorpus { chains })
}

impl ChainCorpus {
    /// Symmetric skip-gram context pairs: `(chain[i], chain[j])` for
    /// `0 < |i - j| <= window`. Repeated nodes within a chain are skipped.
    pub fn context_pairs(&self, window: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in &self.chains {
            for i in 0..c.len() {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(c.len() - 1);
                for j in lo..=hi {
                    if j != i && c[i] != c[j] {
                        out.push((c[i], c[j]));
                    }
                }
            }
        }
        out
    }
}
