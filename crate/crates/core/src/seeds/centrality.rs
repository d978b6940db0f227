use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

pub const DAMPING: f64 = 0.85;
pub const PAGERANK_TOLERANCE: f64 = 1e-10;
pub const PAGERANK_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Degree,
    Kcore,
    Pagerank,
    Closeness,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::Degree,
        Measure::Kcore,
        Measure::Pagerank,
        Measure::Closeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::Kcore => "kcore",
            Measure::Pagerank => "pagerank",
            Measure::Closeness => "closeness",
        }
    }

    /// Community strategy named after the measure: D-D, D-K, D-PR, D-C.
    pub fn strategy(self) -> &'static str {
        match self {
            Measure::Degree => "D-D",
            Measure::Kcore => "D-K",
            Measure::Pagerank => "D-PR",
            Measure::Closeness => "D-C",
        }
    }

    pub fn from_strategy(name: &str) -> Option<Measure> {
        Measure::ALL
            .into_iter()
            .find(|m| m.strategy().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "degree" => Ok(Measure::Degree),
            "kcore" | "k-core" => Ok(Measure::Kcore),
            "pagerank" => Ok(Measure::Pagerank),
            "closeness" => Ok(Measure::Closeness),
            _ => Measure::from_strategy(s).ok_or_else(|| Error::Unknown {
                kind: "centrality measure",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub measure: Measure,
    pub scores: Vec<f64>,
}

pub fn centrality(graph: &AttributedGraph, measure: Measure) -> Result<CentralityScores> {
    if graph.node_count() == 0 {
        return Err(Error::Empty("graph"));
    }
    let scores = match measure {
        Measure::Degree => (0..graph.node_count())
            .map(|v| graph.degree(v) as f64)
            .collect(),
        Measure::Kcore => coreness(graph).into_iter().map(|c| c as f64).collect(),
        Measure::Pagerank => pagerank(graph, DAMPING, PAGERANK_TOLERANCE)?,
        Measure::Closeness => closeness(graph),
    };
    Ok(CentralityScores { measure, scores })
}

/// Neighbor lists of the undirected view.
pub fn undirected_neighbors(graph: &AttributedGraph) -> Vec<Vec<usize>> {
    (0..graph.node_count())
        .map(|v| {
            let mut nb: Vec<usize> = graph
                .out_neighbors(v)
                .iter()
                .chain(graph.in_neighbors(v))
                .copied()
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect()
}

/// Core number of each node on the undirected view, by bucketed peeling.
pub fn coreness(graph: &AttributedGraph) -> Vec<usize> {
    let nbrs = undirected_neighbors(graph);
    let n = nbrs.len();
    let mut deg: Vec<usize> = nbrs.iter().map(Vec::len).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[deg[v]].push(v);
    }
    let mut done = vec![false; n];
    let mut core = vec![0; n];
    let mut k = 0;
    let mut d = 0;
    let mut removed = 0;
    while removed < n {
        // Buckets hold stale entries; skip those whose degree moved.
        let Some(v) = buckets[d].pop() else {
            d += 1;
            continue;
        };
        if done[v] || deg[v] != d {
            continue;
        }
        k = k.max(d);
        core[v] = k;
        done[v] = true;
        removed += 1;
        for &u in &nbrs[v] {
            if !done[u] && deg[u] > 0 {
                deg[u] -= 1;
                buckets[deg[u]].push(u);
                d = d.min(deg[u]);
            }
        }
    }
    core
}

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
pub fn pagerank(graph: &AttributedGraph, damping: f64, tolerance: f64) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Empty("graph"));
    }
    if !(0.0..1.0).contains(&damping) {
        return Err(Error::Parameter(format!(
            "damping {damping} outside [0, 1)"
        )));
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..PAGERANK_MAX_ITERATIONS {
        let dangling: f64 = (0..n)
            .filter(|&v| graph.out_degree(v) == 0)
            .map(|v| x[v])
            .sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for v in 0..n {
            next[v] = base
                + damping
                    * graph
                        .in_neighbors(v)
                        .iter()
                        .map(|&u| x[u] / graph.out_degree(u) as f64)
                        .sum::<f64>();
        }
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff < tolerance {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|s| *s /= total);
    Ok(x)
}

/// Out-distance closeness with the Wasserman–Faust reachability factor:
/// (r/(n−1)) · (r/Σd), where r counts nodes reachable from v.
pub fn closeness(graph: &AttributedGraph) -> Vec<f64> {
    let n = graph.node_count();
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![usize::MAX; n], VecDeque::new()),
            |(dist, queue), s| {
                dist.iter_mut().for_each(|d| *d = usize::MAX);
                dist[s] = 0;
                queue.push_back(s);
                let (mut reached, mut total) = (0usize, 0usize);
                while let Some(v) = queue.pop_front() {
                    for &u in graph.out_neighbors(v) {
                        if dist[u] == usize::MAX {
                            dist[u] = dist[v] + 1;
                            reached += 1;
                            total += dist[u];
                            queue.push_back(u);
                        }
                    }
                }
                if reached == 0 {
                    0.0
                } else {
                    let r = reached as f64;
                    (r / (n - 1) as f64) * (r / total as f64)
                }
            },
        )
        .collect()
}
