use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::cascade::Simulator;
use crate::diffusion::DiffusionModel;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::rng;
use crate::seeds::SeedSet;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub order: Vec<usize>,
    /// Marginal gain of each pick.
    pub gains: Vec<f64>,
    pub evaluations: usize,
}

/// Plain greedy: every round scores every remaining node. Ties go to the
/// lower id.
pub fn naive_greedy(n: usize, k: usize, mut value: impl FnMut(&[usize]) -> f64) -> GreedyTrace {
    let mut set = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let mut base = 0.0;
    let mut trace = GreedyTrace {
        order: Vec::new(),
        gains: Vec::new(),
        evaluations: 0,
    };
    for _ in 0..k.min(n) {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| !chosen[v]) {
            set.push(v);
            let gain = value(&set) - base;
            set.pop();
            trace.evaluations += 1;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((v, gain));
            }
        }
        let (v, gain) = best.expect("a node remains");
        chosen[v] = true;
        set.push(v);
        base += gain;
        trace.order.push(v);
        trace.gains.push(gain);
    }
    trace
}

struct Entry {
    gain: f64,
    node: usize,
    round: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap on gain, then lower node id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then(other.node.cmp(&self.node))
    }
}

/// Lazy (CELF) greedy. Stale gains act as upper bounds, so for a submodular
/// `value` the picks equal [`naive_greedy`]'s, tie rule included.
pub fn lazy_greedy(n: usize, k: usize, mut value: impl FnMut(&[usize]) -> f64) -> GreedyTrace {
    let mut set: Vec<usize> = Vec::with_capacity(k);
    let mut heap = BinaryHeap::with_capacity(n);
    let mut trace = GreedyTrace {
        order: Vec::new(),
        gains: Vec::new(),
        evaluations: 0,
    };
    for v in 0..n {
        trace.evaluations += 1;
        heap.push(Entry {
            gain: value(&[v]),
            node: v,
            round: 0,
        });
    }
    let mut base = 0.0;
    while set.len() < k.min(n) {
        let top = heap.pop().expect("heap holds every unpicked node");
        let round = set.len();
        if top.round == round {
            set.push(top.node);
            base += top.gain;
            trace.order.push(top.node);
            trace.gains.push(top.gain);
            continue;
        }
        set.push(top.node);
        let gain = value(&set) - base;
        set.pop();
        trace.evaluations += 1;
        heap.push(Entry {
            gain,
            node: top.node,
            round,
        });
    }
    trace
}

/// CELF greedy over Monte-Carlo spread. Every evaluation reuses the same `r`
/// simulation seeds, i.e. the same `r` live-edge worlds, so candidates are
/// compared on common random numbers and the estimate is submodular for
/// cascade models.
pub fn celf_greedy(
    graph: &AttributedGraph,
    model: &DiffusionModel,
    k: usize,
    r: usize,
    seed: u64,
) -> Result<SeedSet> {
    let n = graph.node_count();
    if k > n {
        return Err(Error::Parameter(format!("cannot pick {k} of {n} nodes")));
    }
    if r == 0 {
        return Err(Error::Parameter("replications must be >= 1".into()));
    }
    model.validate(graph)?;
    let worlds: Vec<u64> = (0..r as u64).map(|i| rng::split(seed, i)).collect();
    // Integer totals keep comparisons exact; divided by r only for reporting.
    let total = |set: &[usize]| -> f64 {
        worlds
            .par_iter()
            .map_init(
                || Simulator::new(graph, model),
                |sim, &w| sim.spread(set, w),
            )
            .sum::<usize>() as f64
    };
    let trace = lazy_greedy(n, k, total);
    let gains: Vec<f64> = trace.gains.iter().map(|g| g / r as f64).collect();
    SeedSet::from_ranked(&trace.order, &gains)
}
