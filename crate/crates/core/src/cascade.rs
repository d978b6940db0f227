//! Cascade simulation, diffusion-dataset generation, Monte-Carlo influence
//! estimation and an exact live-edge enumeration oracle.
//!
//! Simulations draw their randomness from [`rng::keyed_unit`] keyed by edge
//! id (IC/PIC coin flips) or node id (LT/PLT thresholds). A simulation seed
//! therefore fixes one live-edge world: the activated set is the set of
//! nodes reachable from the seeds in that world, whichever seeds are used.

use std::collections::VecDeque;

use log::warn;
use rand::seq::index;
use rayon::prelude::*;

use crate::diffusion::DiffusionModel;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, DiffusionDataset, NodeSet};
use crate::rng;

/// Outcome of a single simulated cascade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeTrace {
    pub activated: NodeSet,
    /// `(activator, activated)` in activation order.
    pub pairs: Vec<(usize, usize)>,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceEstimate {
    pub mean: f64,
    /// Standard deviation of the per-repeat batch means.
    pub std: f64,
    pub replications: usize,
    pub repeats: usize,
}

const THRESHOLD_STREAM: u64 = 0x5448_5245_5348;

/// Reusable buffers for repeated simulations on one graph/model pair.
pub struct Simulator<'a> {
    graph: &'a AttributedGraph,
    model: &'a DiffusionModel,
    epoch: u32,
    stamp: Vec<u32>,
    round_of: Vec<u32>,
    acc_stamp: Vec<u32>,
    acc: Vec<f64>,
    frontier: Vec<usize>,
    next: Vec<usize>,
    touched: Vec<usize>,
}

impl<'a> Simulator<'a> {
    pub fn new(graph: &'a AttributedGraph, model: &'a DiffusionModel) -> Self {
        let n = graph.node_count();
        Self {
            graph,
            model,
            epoch: 0,
            stamp: vec![0; n],
            round_of: vec![0; n],
            acc_stamp: vec![0; n],
            acc: vec![0.0; n],
            frontier: Vec::new(),
            next: Vec::new(),
            touched: Vec::new(),
        }
    }

    fn bump(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.acc_stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    #[inline]
    fn is_active(&self, v: usize) -> bool {
        self.stamp[v] == self.epoch
    }

    /// Number of activated nodes; `seeds` must be valid and duplicate-free.
    pub fn spread(&mut self, seeds: &[usize], sim_seed: u64) -> usize {
        self.run(seeds, sim_seed, None).0
    }

    /// Returns `(activated count, rounds)`; records pairs into `record` when given.
    fn run(
        &mut self,
        seeds: &[usize],
        sim_seed: u64,
        mut record: Option<&mut Vec<(usize, usize)>>,
    ) -> (usize, usize) {
        self.bump();
        let epoch = self.epoch;
        self.frontier.clear();
        for &s in seeds {
            if self.stamp[s] != epoch {
                self.stamp[s] = epoch;
                self.round_of[s] = 0;
                self.frontier.push(s);
            }
        }
        self.frontier.sort_unstable();
        let mut count = self.frontier.len();
        let mut rounds = 0usize;
        let threshold = self.model.kind().is_threshold();
        let theta_seed = rng::split(sim_seed, THRESHOLD_STREAM);
        let out = self.graph.out_adj();

        while !self.frontier.is_empty() {
            rounds += 1;
            self.next.clear();
            if !threshold {
                for fi in 0..self.frontier.len() {
                    let u = self.frontier[fi];
                    for (&v, &e) in out.neighbors(u).iter().zip(out.edge_ids(u)) {
                        if self.stamp[v] == epoch {
                            continue;
                        }
                        if rng::keyed_unit(sim_seed, e as u64) < self.model.edge_value(e) {
                            self.stamp[v] = epoch;
                            self.round_of[v] = rounds as u32;
                            self.next.push(v);
                            if let Some(r) = record.as_deref_mut() {
                                r.push((u, v));
                            }
                        }
                    }
                }
            } else {
                self.touched.clear();
                for fi in 0..self.frontier.len() {
                    let u = self.frontier[fi];
                    for (&v, &e) in out.neighbors(u).iter().zip(out.edge_ids(u)) {
                        if self.stamp[v] == epoch {
                            continue;
                        }
                        if self.acc_stamp[v] != epoch {
                            self.acc_stamp[v] = epoch;
                            self.acc[v] = 0.0;
                        }
                        self.acc[v] += self.model.edge_value(e);
                        self.touched.push(v);
                    }
                }
                self.touched.sort_unstable();
                self.touched.dedup();
                for ti in 0..self.touched.len() {
                    let v = self.touched[ti];
                    // theta in (0, 1]
                    let theta = 1.0 - rng::keyed_unit(theta_seed, v as u64);
                    if self.acc[v] >= theta {
                        self.next.push(v);
                    }
                }
                for ni in 0..self.next.len() {
                    let v = self.next[ni];
                    if let Some(r) = record.as_deref_mut() {
                        r.push((self.lt_activator(v, rounds as u32), v));
                    }
                }
                for ni in 0..self.next.len() {
                    let v = self.next[ni];
                    self.stamp[v] = epoch;
                    self.round_of[v] = rounds as u32;
                }
            }
            count += self.next.len();
            std::mem::swap(&mut self.frontier, &mut self.next);
            self.frontier.sort_unstable();
        }
        // the last round activated nothing
        (count, rounds.saturating_sub(1))
    }

    /// Highest-weight in-neighbor active before `round`; ties go to the lowest id.
    fn lt_activator(&self, v: usize, round: u32) -> usize {
        let inn = self.graph.in_adj();
        let mut best: Option<(usize, f64)> = None;
        for (&u, &e) in inn.neighbors(v).iter().zip(inn.edge_ids(v)) {
            if self.is_active(u) && self.round_of[u] < round {
                let w = self.model.edge_value(e);
                if best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((u, w));
                }
            }
        }
        best.expect("activated node has an active in-neighbor").0
    }

    pub(crate) fn activated(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.stamp.len()).filter(|&v| self.stamp[v] == self.epoch)
    }
}

fn check_seeds(graph: &AttributedGraph, seeds: &NodeSet) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::Empty("seed set"));
    }
    seeds.validate(graph.node_count())
}

fn check_model(graph: &AttributedGraph, model: &DiffusionModel) -> Result<()> {
    if model.edge_values().len() != graph.edge_count() {
        return Err(Error::Dimension(format!(
            "model has {} edge values, graph has {} edges",
            model.edge_values().len(),
            graph.edge_count()
        )));
    }
    Ok(())
}

pub fn simulate_cascade(
    graph: &AttributedGraph,
    model: &DiffusionModel,
    seeds: &NodeSet,
    rng_seed: u64,
) -> Result<CascadeTrace> {
    check_seeds(graph, seeds)?;
    check_model(graph, model)?;
    let mut sim = Simulator::new(graph, model);
    let mut pairs = Vec::new();
    let (_, rounds) = sim.run(seeds.as_slice(), rng_seed, Some(&mut pairs));
    Ok(CascadeTrace {
        activated: sim.activated().collect(),
        pairs,
        rounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetOptions {
    /// Fraction of nodes seeded per cascade; at least one seed is used.
    pub seed_fraction: f64,
    /// Give up after this many cascades.
    pub max_cascades: usize,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            seed_fraction: 0.01,
            max_cascades: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub dataset: DiffusionDataset,
    pub cascades: usize,
    /// Set when the cascade cap was reached before `N` pairs were collected.
    pub incomplete: bool,
}

/// Repeatedly seeds uniform random node sets, simulates and records every
/// edge-activated pair until exactly `pairs` are collected.
pub fn generate_dataset(
    graph: &AttributedGraph,
    model: &DiffusionModel,
    pairs: usize,
    opts: &DatasetOptions,
    rng_seed: u64,
) -> Result<GeneratedDataset> {
    if pairs == 0 {
        return Err(Error::Parameter("dataset size must be >= 1".into()));
    }
    if !(opts.seed_fraction > 0.0 && opts.seed_fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "seed fraction {} outside (0, 1]",
            opts.seed_fraction
        )));
    }
    check_model(graph, model)?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Empty("graph"));
    }
    let per_cascade = ((opts.seed_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut sim = Simulator::new(graph, model);
    let mut ds = DiffusionDataset::new();
    let mut buf = Vec::new();
    let mut cascades = 0;
    while ds.len() < pairs && cascades < opts.max_cascades {
        let s = rng::split(rng_seed, cascades as u64);
        let mut r = rng::rng(s);
        let mut seeds = index::sample(&mut r, n, per_cascade).into_vec();
        seeds.sort_unstable();
        buf.clear();
        sim.run(&seeds, rng::split(s, 1), Some(&mut buf));
        if !buf.is_empty() {
            let c = ds.begin_cascade(cascades.to_string());
            for &(u, v) in &buf {
                ds.push(c, u, v);
            }
        }
        cascades += 1;
    }
    let incomplete = ds.len() < pairs;
    if incomplete {
        warn!(
            "collected only {} of {pairs} diffusion pairs after {cascades} cascades",
            ds.len()
        );
    }
    ds.truncate(pairs);
    Ok(GeneratedDataset {
        dataset: ds,
        cascades,
        incomplete,
    })
}

/// Monte-Carlo estimate of the expected spread of `seeds`: `repeats` batches
/// of `replications` independent cascades each.
pub fn estimate_influence(
    graph: &AttributedGraph,
    model: &DiffusionModel,
    seeds: &NodeSet,
    replications: usize,
    repeats: usize,
    rng_seed: u64,
) -> Result<InfluenceEstimate> {
    if replications == 0 || repeats == 0 {
        return Err(Error::Parameter(
            "replications and repeats must be >= 1".into(),
        ));
    }
    check_seeds(graph, seeds)?;
    check_model(graph, model)?;
    let batch_means: Vec<f64> = (0..repeats)
        .map(|b| {
            let bseed = rng::split(rng_seed, b as u64);
            let total: usize = (0..replications)
                .into_par_iter()
                .map_init(
                    || Simulator::new(graph, model),
                    |sim, i| sim.spread(seeds.as_slice(), rng::split(bseed, i as u64)),
                )
                .sum();
            total as f64 / replications as f64
        })
        .collect();
    let mean = batch_means.iter().sum::<f64>() / repeats as f64;
    let std = if repeats > 1 {
        let var =
            batch_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    Ok(InfluenceEstimate {
        mean,
        std,
        replications,
        repeats,
    })
}

/// Enumeration budget of [`exact_influence_oracle`].
pub const ENUMERATION_CAP: u64 = 1 << 20;

/// Expected spread by summing over every live-edge world.
///
/// IC/PIC: each edge is live independently with its probability.
/// LT/PLT: each node keeps at most one live in-edge, `(u, v)` with
/// probability `w(u, v)` and none with `1 - sum w`.
pub fn exact_influence_oracle(
    graph: &AttributedGraph,
    model: &DiffusionModel,
    seeds: &NodeSet,
) -> Result<f64> {
    check_seeds(graph, seeds)?;
    check_model(graph, model)?;
    let n = graph.node_count();
    let m = graph.edge_count();
    let mut live_out: Vec<Vec<usize>> = vec![Vec::new(); n];

    if !model.kind().is_threshold() {
        if m > 20 {
            return Err(Error::TooLarge(format!("{m} edges (limit 20)")));
        }
        let p = model.edge_values();
        let mut total = 0.0;
        for mask in 0u64..(1u64 << m) {
            let mut prob = 1.0;
            live_out.iter_mut().for_each(Vec::clear);
            for (e, &(u, v)) in graph.edges().iter().enumerate() {
                if mask >> e & 1 == 1 {
                    prob *= p[e];
                    live_out[u].push(v);
                } else {
                    prob *= 1.0 - p[e];
                }
            }
            if prob > 0.0 {
                total += prob * reachable(&live_out, seeds) as f64;
            }
        }
        return Ok(total);
    }

    let mut combos: u64 = 1;
    for v in 0..n {
        combos = combos.saturating_mul(graph.in_degree(v) as u64 + 1);
        if combos > ENUMERATION_CAP {
            return Err(Error::TooLarge(format!(
                "more than {ENUMERATION_CAP} live-edge choices"
            )));
        }
    }
    // choice[v] == in_degree(v) means no live in-edge
    let mut choice = vec![0usize; n];
    let mut total = 0.0;
    'outer: loop {
        let mut prob = 1.0;
        live_out.iter_mut().for_each(Vec::clear);
        for v in 0..n {
            let ids = graph.in_adj().edge_ids(v);
            if choice[v] < ids.len() {
                let e = ids[choice[v]];
                prob *= model.edge_value(e);
                live_out[graph.in_neighbors(v)[choice[v]]].push(v);
            } else {
                let s: f64 = ids.iter().map(|&e| model.edge_value(e)).sum();
                prob *= (1.0 - s).max(0.0);
            }
        }
        if prob > 0.0 {
            total += prob * reachable(&live_out, seeds) as f64;
        }
        for v in 0..n {
            choice[v] += 1;
            if choice[v] <= graph.in_degree(v) {
                continue 'outer;
            }
            choice[v] = 0;
        }
        break;
    }
    Ok(total)
}

fn reachable(out: &[Vec<usize>], seeds: &NodeSet) -> usize {
    let mut seen = vec![false; out.len()];
    let mut queue: VecDeque<usize> = seeds.iter().collect();
    for s in seeds.iter() {
        seen[s] = true;
    }
    let mut count = seeds.len();
    while let Some(u) = queue.pop_front() {
        for &v in &out[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count
}

/// Stable short hash of a seed set for report rows.
pub fn seeds_hash(seeds: &NodeSet) -> String {
    let h = seeds
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, v| rng::mix64(h ^ v as u64));
    format!("{h:016x}")
}

pub const ESTIMATE_CSV_HEADER: &str = "seeds_hash,mean,std,R,repeats,wall_ms";

pub fn estimate_csv_row(seeds: &NodeSet, est: &InfluenceEstimate, wall_ms: f64) -> String {
    format!(
        "{},{},{},{},{},{:.3}",
        seeds_hash(seeds),
        est.mean,
        est.std,
        est.replications,
        est.repeats,
        wall_ms
    )
}
