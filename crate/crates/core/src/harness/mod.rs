//! Configuration-driven experiment runner: ground-truth model → cascades →
//! relation learning → weight extraction → clustering → seed selection →
//! Monte-Carlo evaluation → report.

mod config;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use log::{info, warn};

use crate::baselines::{
    celf_greedy, default_theta, gatk_select, random_seeds, rl_ris_select, spec_pr_select, Baseline,
};
use crate::cascade::{estimate_influence, generate_dataset};
use crate::community::{
    cluster_similarity, merge_tiny_communities, ncut_score, symmetrized_similarity, tiny_threshold,
    Partition,
};
use crate::diffusion::{make_model, DiffusionModel};
use crate::error::{Error, Result};
use crate::graph::io::{load_attributed_graph_with, load_diffusion_dataset, EdgeListOptions};
use crate::graph::synthetic::community_graph;
use crate::graph::{AttributedGraph, DiffusionDataset};
use crate::relation::{
    embed, extract_edge_weights, train_relation_model, AttentionModel, TrainConfig,
    TrainedRelationModel, WeightedGraph,
};
use crate::rng;
use crate::seeds::{allocate_budget, select_seeds, SeedSet};
use crate::stats;

pub use config::{DatasetSection, EvaluationSection, GraphSection, ModelSection, RunConfig};
pub use report::{
    emit_report, Cell, CellOutcome, DatasetStats, RunReport, TrainingStats, CSV_HEADER,
};

/// Seed of a named stage, derived from the master seed.
pub fn stage_seed(master: u64, stage: &str) -> u64 {
    rng::stage(master, stage)
}

pub fn load_or_generate_graph(cfg: &RunConfig) -> Result<AttributedGraph> {
    match &cfg.graph.edges {
        Some(edges) => {
            let opts = EdgeListOptions {
                undirected: cfg.graph.undirected,
                relabel: cfg.graph.relabel,
                node_count: None,
            };
            Ok(load_attributed_graph_with(edges, cfg.graph.features.as_deref(), &opts)?.graph)
        }
        None => community_graph(&cfg.graph.synthetic, stage_seed(cfg.master_seed, "graph")),
    }
}

pub fn load_or_generate_model(cfg: &RunConfig, graph: &AttributedGraph) -> Result<DiffusionModel> {
    match &cfg.model.path {
        Some(p) => DiffusionModel::load(p, graph),
        None => make_model(
            cfg.model.kind,
            graph,
            cfg.model
                .seed
                .unwrap_or_else(|| stage_seed(cfg.master_seed, "model")),
            cfg.model.calibration,
        ),
    }
}

/// Dataset plus the number of cascades simulated (0 when loaded).
pub fn load_or_generate_dataset(
    cfg: &RunConfig,
    graph: &AttributedGraph,
    model: &DiffusionModel,
) -> Result<(DiffusionDataset, usize, bool)> {
    match &cfg.dataset.path {
        Some(p) => Ok((load_diffusion_dataset(p, graph)?, 0, false)),
        None => {
            let g = generate_dataset(
                graph,
                model,
                cfg.dataset.pairs,
                &cfg.dataset.options(),
                stage_seed(cfg.master_seed, "dataset"),
            )?;
            Ok((g.dataset, g.cascades, g.incomplete))
        }
    }
}

/// The configured training settings, seeded from the master seed.
pub fn train_config(cfg: &RunConfig) -> TrainConfig {
    TrainConfig {
        seed: stage_seed(cfg.master_seed, "train"),
        ..cfg.train.clone()
    }
}

pub fn cluster_seed(master: u64, k: usize) -> u64 {
    rng::split(stage_seed(master, "cluster"), k as u64)
}

/// Seeds of baseline `b` at budget `k`. GATK and RL-RIS need the trained
/// model and its extracted weights.
pub fn baseline_seeds(
    cfg: &RunConfig,
    b: Baseline,
    graph: &AttributedGraph,
    model: &DiffusionModel,
    learned: Option<(&AttentionModel, &WeightedGraph)>,
    k: usize,
) -> Result<SeedSet> {
    let seed = rng::split(stage_seed(cfg.master_seed, b.name()), k as u64);
    let k = k.min(graph.node_count());
    match (b, learned) {
        (Baseline::Random, _) => random_seeds(graph, k, seed),
        (Baseline::Celf, _) => celf_greedy(graph, model, k, cfg.evaluation.celf_replications, seed),
        (Baseline::SpecPr, _) => spec_pr_select(graph, k, seed),
        (Baseline::Gatk, Some((m, _))) => embed(m, graph).and_then(|z| gatk_select(&z, k, seed)),
        (Baseline::RlRis, Some((_, w))) => {
            let theta = cfg
                .evaluation
                .rl_ris_theta
                .unwrap_or_else(|| default_theta(graph.node_count()));
            rl_ris_select(graph, w, k, theta, seed).map(|s| s.seeds)
        }
        (_, None) => Err(Error::Validation(format!(
            "{} needs a trained relation model",
            b.name()
        ))),
    }
}

/// Communities for budget `k`: `k` spectral clusters, tiny ones merged while
/// at least `k` communities remain.
pub fn communities_for_budget(
    weighted: &WeightedGraph,
    k: usize,
    seed: u64,
    opts: &crate::community::ClusterOptions,
) -> Result<(Partition, f64)> {
    let s = symmetrized_similarity(weighted);
    let k_eff = k.min(weighted.node_count());
    let p = cluster_similarity(&s, k_eff, seed, opts)?;
    let p = merge_tiny_communities(&s, &p, tiny_threshold(weighted.node_count(), k_eff), k_eff);
    let score = ncut_score(&s, &p);
    Ok((p, score))
}

/// Post-training state shared by every cell.
struct Learned {
    weights: WeightedGraph,
    train_ms: f64,
    extract_ms: f64,
    trained: TrainedRelationModel,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let measures = cfg.measures()?;
    let baselines = cfg.baseline_kinds()?;
    let master = cfg.master_seed;

    let graph = load_or_generate_graph(cfg)?;
    let model = load_or_generate_model(cfg, &graph)?;
    let (dataset, cascades, incomplete) = load_or_generate_dataset(cfg, &graph, &model)?;
    info!(
        "graph: {} nodes, {} edges; dataset: {} pairs from {cascades} cascades",
        graph.node_count(),
        graph.edge_count(),
        dataset.len()
    );

    let needs_training = !measures.is_empty() || baselines.iter().any(|b| b.needs_training());
    let train_cfg = train_config(cfg);
    let t = Instant::now();
    let learned: Option<std::result::Result<Learned, String>> = needs_training.then(|| {
        let trained =
            train_relation_model(&graph, &dataset, &train_cfg).map_err(|e| e.to_string())?;
        let train_ms = ms(t);
        let te = Instant::now();
        let weights = extract_edge_weights(&trained.model, &graph).map_err(|e| e.to_string())?;
        info!("training took {train_ms:.0} ms");
        Ok(Learned {
            weights,
            train_ms,
            extract_ms: ms(te),
            trained,
        })
    });
    let train_ms = ms(t);
    let training = match &learned {
        Some(Ok(l)) => Some(TrainingStats {
            epochs: l.trained.loss_history.len(),
            positives: l.trained.positives,
            initial_loss: l.trained.loss_history.first().copied(),
            final_loss: l.trained.loss_history.last().copied(),
            weight_spearman: (graph.edge_count() > 1)
                .then(|| stats::spearman(l.weights.weights(), model.edge_values())),
            time_ms: l.train_ms,
            error: None,
        }),
        Some(Err(e)) => {
            warn!("training failed: {e}");
            Some(TrainingStats {
                error: Some(e.clone()),
                time_ms: train_ms,
                ..TrainingStats::default()
            })
        }
        None => None,
    };

    let eval_seed = stage_seed(master, "evaluate");
    let evaluate = |seeds: &SeedSet| {
        estimate_influence(
            &graph,
            &model,
            &seeds.nodes(),
            cfg.evaluation.replications,
            cfg.evaluation.repeats,
            eval_seed,
        )
    };

    let mut cells = Vec::new();
    let mut ncut = BTreeMap::new();
    for &k in &cfg.budgets {
        let cluster_seed = cluster_seed(master, k);
        // One partition per budget, shared by the community strategies.
        let partition: Option<std::result::Result<(Partition, f64, f64), String>> = (!measures
            .is_empty())
        .then(|| match &learned {
            Some(Ok(l)) => {
                let t = Instant::now();
                let (p, score) = communities_for_budget(&l.weights, k, cluster_seed, &cfg.cluster)
                    .map_err(|e| e.to_string())?;
                Ok((p, score, ms(t)))
            }
            Some(Err(e)) => Err(format!("training failed: {e}")),
            None => unreachable!("strategies imply training"),
        });
        if let Some(Ok((_, score, _))) = &partition {
            ncut.insert(k, *score);
        }
        for &m in &measures {
            let outcome = match &partition {
                Some(Ok((p, _, cluster_ms))) => {
                    let extract_ms = learned
                        .as_ref()
                        .and_then(|l| l.as_ref().ok())
                        .map_or(0.0, |l| l.extract_ms);
                    let t = Instant::now();
                    let picked = allocate_budget(p, k).and_then(|b| select_seeds(&graph, p, &b, m));
                    let select_ms = ms(t) + cluster_ms + extract_ms;
                    finish(picked, select_ms, &evaluate)
                }
                Some(Err(e)) => CellOutcome::Failed(e.clone()),
                None => unreachable!(),
            };
            cells.push(Cell {
                method: m.strategy().to_string(),
                k,
                outcome,
            });
        }
        for &b in &baselines {
            let t = Instant::now();
            let picked = match (&learned, b.needs_training()) {
                (Some(Err(e)), true) => Err(Error::Validation(format!("training failed: {e}"))),
                (Some(Ok(l)), true) => baseline_seeds(
                    cfg,
                    b,
                    &graph,
                    &model,
                    Some((&l.trained.model, &l.weights)),
                    k,
                ),
                _ => baseline_seeds(cfg, b, &graph, &model, None, k),
            };
            let select_ms = ms(t);
            cells.push(Cell {
                method: b.name().to_string(),
                k,
                outcome: finish(picked, select_ms, &evaluate),
            });
        }
    }

    Ok(RunReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        dataset: DatasetStats {
            pairs: dataset.len(),
            distinct_pairs: dataset.multiplicities().len(),
            cascades,
            incomplete,
        },
        training,
        ncut,
        cells,
    })
}

fn finish(
    picked: Result<SeedSet>,
    select_ms: f64,
    evaluate: &dyn Fn(&SeedSet) -> Result<crate::cascade::InfluenceEstimate>,
) -> CellOutcome {
    match picked.and_then(|s| evaluate(&s).map(|e| (s, e))) {
        Ok((seeds, estimate)) => CellOutcome::Done {
            mean: estimate.mean,
            std: estimate.std,
            time_ms: select_ms,
            seeds,
        },
        Err(e) => CellOutcome::Failed(e.to_string()),
    }
}
