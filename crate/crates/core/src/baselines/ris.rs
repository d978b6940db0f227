use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeSet};
use crate::relation::WeightedGraph;
use crate::rng;
use crate::seeds::SeedSet;

/// Upper bound on the number of RR sets drawn for one selection.
pub const MAX_THETA: usize = 2_000_000;

/// Nodes that reach `root` in one sampled reverse live-edge world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrSet {
    pub root: usize,
    pub members: NodeSet,
}

/// 20·n·ln n, at least 1 and at most [`MAX_THETA`].
pub fn default_theta(n: usize) -> usize {
    let t = (20.0 * n as f64 * (n.max(1) as f64).ln()).ceil() as usize;
    t.clamp(1, MAX_THETA)
}

fn check_weights(graph: &AttributedGraph, weights: &[f64]) -> Result<()> {
    if weights.len() != graph.edge_count() {
        return Err(Error::Dimension(format!(
            "{} weights for {} edges",
            weights.len(),
            graph.edge_count()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::Validation(format!(
            "weight {w} is not a probability"
        )));
    }
    Ok(())
}

/// Uniform root, then reverse BFS keeping each in-edge `(u → v)` with
/// probability `weights[edge id]`.
pub fn generate_rr_set(graph: &AttributedGraph, weights: &[f64], seed: u64) -> Result<RrSet> {
    if graph.node_count() == 0 {
        return Err(Error::Empty("graph"));
    }
    check_weights(graph, weights)?;
    let mut seen = vec![false; graph.node_count()];
    let mut members = Vec::new();
    let root = sample_into(graph, weights, seed, &mut seen, &mut members);
    Ok(RrSet {
        root,
        members: NodeSet::new(members),
    })
}

/// Leaves `seen` all false again; returns the root.
fn sample_into(
    graph: &AttributedGraph,
    weights: &[f64],
    seed: u64,
    seen: &mut [bool],
    members: &mut Vec<usize>,
) -> usize {
    let mut r = rng::rng(seed);
    let root = r.random_range(0..graph.node_count());
    members.clear();
    members.push(root);
    seen[root] = true;
    let inn = graph.in_adj();
    let mut head = 0;
    while head < members.len() {
        let v = members[head];
        head += 1;
        for (&u, &e) in inn.neighbors(v).iter().zip(inn.edge_ids(v)) {
            if !seen[u] && r.random::<f64>() < weights[e] {
                seen[u] = true;
                members.push(u);
            }
        }
    }
    members.iter().for_each(|&m| seen[m] = false);
    root
}

#[derive(Debug, Clone)]
pub struct RisSelection {
    pub seeds: SeedSet,
    /// n × fraction of RR sets covered by the seeds.
    pub estimate: f64,
    pub theta: usize,
}

/// Fixed-θ reverse-reachable-set greedy: treats the weights as IC
/// probabilities, draws `theta` RR sets and picks `k` nodes by greedy max
/// coverage (lowest id on ties).
pub fn rl_ris_select(
    graph: &AttributedGraph,
    weights: &WeightedGraph,
    k: usize,
    theta: usize,
    seed: u64,
) -> Result<RisSelection> {
    let n = graph.node_count();
    if theta == 0 {
        return Err(Error::Parameter("theta must be >= 1".into()));
    }
    if k > n {
        return Err(Error::Parameter(format!("cannot pick {k} of {n} nodes")));
    }
    if weights.node_count() != n || weights.edges() != graph.edges() {
        return Err(Error::Dimension(
            "weights belong to a different graph".into(),
        ));
    }
    let w = weights.weights();
    check_weights(graph, w)?;
    if n == 0 {
        return Err(Error::Empty("graph"));
    }

    let sets: Vec<Vec<usize>> = (0..theta as u64)
        .into_par_iter()
        .map_init(
            || (vec![false; n], Vec::new()),
            |(seen, buf), i| {
                sample_into(graph, w, rng::split(seed, i), seen, buf);
                buf.clone()
            },
        )
        .collect();

    // node -> sets containing it
    let mut count = vec![0usize; n];
    sets.iter().flatten().for_each(|&v| count[v] += 1);
    let mut index: Vec<Vec<u32>> = count.iter().map(|&c| Vec::with_capacity(c)).collect();
    for (i, s) in sets.iter().enumerate() {
        for &v in s {
            index[v].push(i as u32);
        }
    }
    let mut covered = vec![false; theta];
    let mut chosen = vec![false; n];
    let mut order = Vec::with_capacity(k);
    let mut gains = Vec::with_capacity(k);
    let mut total = 0usize;
    for _ in 0..k {
        let best = (0..n)
            .filter(|&v| !chosen[v])
            .fold(None, |b: Option<usize>, v| match b {
                Some(b) if count[b] >= count[v] => Some(b),
                _ => Some(v),
            })
            .expect("k <= n");
        chosen[best] = true;
        order.push(best);
        gains.push(count[best] as f64 * n as f64 / theta as f64);
        total += count[best];
        for &s in &index[best] {
            let s = s as usize;
            if !covered[s] {
                covered[s] = true;
                for &v in &sets[s] {
                    count[v] -= 1;
                }
            }
        }
    }
    Ok(RisSelection {
        seeds: SeedSet::from_ranked(&order, &gains)?,
        estimate: n as f64 * total as f64 / theta as f64,
        theta,
    })
}
