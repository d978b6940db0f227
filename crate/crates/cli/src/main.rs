//! `dscom`: run the influence-maximization pipeline end to end or one stage
//! at a time. Stages without an input file fall back to what the config
//! (and master seed) would generate, so files and in-memory runs agree.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use dscom_core::baselines::Baseline;
use dscom_core::cascade::{estimate_csv_row, ESTIMATE_CSV_HEADER};
use dscom_core::community::Partition;
use dscom_core::graph::io::{write_dataset, write_graph};
use dscom_core::harness::{
    baseline_seeds, cluster_seed, communities_for_budget, emit_report, load_or_generate_dataset,
    load_or_generate_graph, load_or_generate_model, run_pipeline, stage_seed, train_config,
    RunConfig,
};
use dscom_core::relation::{
    extract_edge_weights, train_relation_model, AttentionModel, WeightedGraph,
};
use dscom_core::seeds::{allocate_budget, select_seeds, Measure, SeedSet};
use dscom_core::{
    estimate_influence, load_diffusion_dataset, AttributedGraph, DiffusionModel, ModelKind,
};

#[derive(Parser)]
#[command(
    name = "dscom",
    version,
    about = "Data-driven community-based influence maximization"
)]
struct Cli {
    /// Master seed; overrides the config's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for `gen-graph` and `pipeline`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GraphArgs {
    /// Edge list, one "u v" per line. Without it the configured graph is used.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Feature rows, one node per line.
    #[arg(long, requires = "edges")]
    features: Option<PathBuf>,
    /// Read each edge line as both directions.
    #[arg(long)]
    undirected: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured synthetic graph as edges.txt and features.txt.
    GenGraph {
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        blocks: Option<usize>,
    },
    /// Draw a ground-truth diffusion model for the graph.
    GenModel {
        #[command(flatten)]
        graph: GraphArgs,
        /// IC, LT, PIC or PLT.
        #[arg(long)]
        kind: Option<ModelKind>,
        /// Target mean edge value.
        #[arg(long)]
        calibration: Option<f64>,
    },
    /// Simulate cascades and write the observed diffusion pairs.
    GenCascades {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Pairs to collect.
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Fit the attention model to a diffusion dataset.
    Train {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Attention weight of every edge from a trained model.
    Extract {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        relation: PathBuf,
    },
    /// Spectral communities of the weighted graph.
    Cluster {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        weights: PathBuf,
        #[arg(short)]
        k: usize,
    },
    /// Per-community seeds: D-D, D-K, D-PR or D-C.
    Select {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        partition: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value = "D-PR")]
        strategy: String,
    },
    /// Monte-Carlo influence of a seed file.
    Evaluate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        seeds: PathBuf,
        /// Cascades per repeat.
        #[arg(short = 'r', long)]
        replications: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Seeds from a comparison method.
    Baseline {
        #[command(flatten)]
        graph: GraphArgs,
        /// random, celf, gatk, spec-pr or rl-ris.
        name: Baseline,
        #[arg(short)]
        k: usize,
        /// Ground-truth model, used by celf.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Trained attention model, used by gatk and rl-ris.
        #[arg(long)]
        relation: Option<PathBuf>,
    },
    /// Full grid from the config; writes the report files.
    Pipeline,
}

struct Ctx {
    cfg: RunConfig,
    out: Option<PathBuf>,
}

impl Ctx {
    fn out_file(&self, default_name: &str) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| self.cfg.output_dir.join(default_name))
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| self.cfg.output_dir.clone())
    }

    fn graph(&self, args: &GraphArgs) -> Result<AttributedGraph> {
        let mut cfg = self.cfg.clone();
        if let Some(edges) = &args.edges {
            cfg.graph.edges = Some(edges.clone());
            cfg.graph.features = args.features.clone();
        }
        cfg.graph.undirected |= args.undirected;
        Ok(load_or_generate_graph(&cfg)?)
    }

    fn model(&self, graph: &AttributedGraph, path: Option<&Path>) -> Result<DiffusionModel> {
        Ok(match path {
            Some(p) => DiffusionModel::load(p, graph)?,
            None => load_or_generate_model(&self.cfg, graph)?,
        })
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    let ctx = Ctx { cfg, out: cli.out };

    match cli.command {
        Command::GenGraph { nodes, blocks } => {
            let mut ctx = ctx;
            let synth = &mut ctx.cfg.graph.synthetic;
            synth.nodes = nodes.unwrap_or(synth.nodes);
            synth.blocks = blocks.unwrap_or(synth.blocks);
            ctx.cfg.graph.edges = None;
            let g = ctx.graph(&GraphArgs::default())?;
            let dir = ctx.out_dir();
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_graph(&g, &dir.join("edges.txt"), &dir.join("features.txt"))?;
            println!(
                "{} nodes, {} edges -> {}",
                g.node_count(),
                g.edge_count(),
                dir.display()
            );
        }
        Command::GenModel {
            graph,
            kind,
            calibration,
        } => {
            let mut ctx = ctx;
            ctx.cfg.model.kind = kind.unwrap_or(ctx.cfg.model.kind);
            ctx.cfg.model.calibration = calibration.unwrap_or(ctx.cfg.model.calibration);
            ctx.cfg.model.path = None;
            let g = ctx.graph(&graph)?;
            let m = ctx.model(&g, None)?;
            let out = ctx.out_file("model.json");
            ensure_parent(&out)?;
            m.save(&out)?;
            let mean = m.edge_values().iter().sum::<f64>() / m.edge_values().len().max(1) as f64;
            println!(
                "{} model, mean edge value {mean:.4} -> {}",
                m.kind().name(),
                out.display()
            );
        }
        Command::GenCascades {
            graph,
            model,
            pairs,
        } => {
            let mut ctx = ctx;
            ctx.cfg.dataset.pairs = pairs.unwrap_or(ctx.cfg.dataset.pairs);
            ctx.cfg.dataset.path = None;
            let g = ctx.graph(&graph)?;
            let m = ctx.model(&g, model.as_deref())?;
            let (ds, cascades, incomplete) = load_or_generate_dataset(&ctx.cfg, &g, &m)?;
            let out = ctx.out_file("dataset.txt");
            ensure_parent(&out)?;
            write_dataset(&ds, &out)?;
            println!(
                "{} pairs from {cascades} cascades{} -> {}",
                ds.len(),
                if incomplete { " (incomplete)" } else { "" },
                out.display()
            );
        }
        Command::Train {
            graph,
            dataset,
            epochs,
        } => {
            let g = ctx.graph(&graph)?;
            let ds = match &dataset {
                Some(p) => load_diffusion_dataset(p, &g)?,
                None => {
                    let m = ctx.model(&g, None)?;
                    load_or_generate_dataset(&ctx.cfg, &g, &m)?.0
                }
            };
            let mut tc = train_config(&ctx.cfg);
            tc.epochs = epochs.unwrap_or(tc.epochs);
            let t = Instant::now();
            let trained = train_relation_model(&g, &ds, &tc)?;
            let out = ctx.out_file("relation.json");
            ensure_parent(&out)?;
            trained.model.save(&out)?;
            let h = &trained.loss_history;
            println!(
                "{} epochs over {} positives, loss {:.4} -> {:.4}, {:.1}s -> {}",
                h.len(),
                trained.positives,
                h.first().copied().unwrap_or(f64::NAN),
                h.last().copied().unwrap_or(f64::NAN),
                t.elapsed().as_secs_f64(),
                out.display()
            );
        }
        Command::Extract { graph, relation } => {
            let g = ctx.graph(&graph)?;
            let m = AttentionModel::load(&relation)?;
            let w = extract_edge_weights(&m, &g)?;
            let out = ctx.out_file("weights.txt");
            ensure_parent(&out)?;
            w.save(&out)?;
            println!("{} edge weights -> {}", w.weights().len(), out.display());
        }
        Command::Cluster { graph, weights, k } => {
            if k == 0 {
                bail!("-k must be at least 1");
            }
            let g = ctx.graph(&graph)?;
            let w = WeightedGraph::load(&weights, &g)?;
            let (p, score) = communities_for_budget(
                &w,
                k,
                cluster_seed(ctx.cfg.master_seed, k),
                &ctx.cfg.cluster,
            )?;
            let out = ctx.out_file("partition.txt");
            ensure_parent(&out)?;
            p.save(&out)?;
            println!(
                "{} communities, ncut {score:.6} -> {}",
                p.k(),
                out.display()
            );
        }
        Command::Select {
            graph,
            partition,
            k,
            strategy,
        } => {
            let measure: Measure = strategy.parse()?;
            let g = ctx.graph(&graph)?;
            let p = Partition::load(&partition)?;
            if p.node_count() != g.node_count() {
                bail!(
                    "partition covers {} nodes, graph has {}",
                    p.node_count(),
                    g.node_count()
                );
            }
            let seeds = select_seeds(&g, &p, &allocate_budget(&p, k)?, measure)?;
            write_seeds(
                &ctx,
                &seeds,
                &format!("seeds_{}_k{k}.txt", measure.strategy()),
            )?;
        }
        Command::Evaluate {
            graph,
            model,
            seeds,
            replications,
            repeats,
        } => {
            let g = ctx.graph(&graph)?;
            let m = ctx.model(&g, model.as_deref())?;
            let s = SeedSet::load(&seeds)?.nodes();
            let r = replications.unwrap_or(ctx.cfg.evaluation.replications);
            let reps = repeats.unwrap_or(ctx.cfg.evaluation.repeats);
            let t = Instant::now();
            let est = estimate_influence(
                &g,
                &m,
                &s,
                r,
                reps,
                stage_seed(ctx.cfg.master_seed, "evaluate"),
            )?;
            let row = estimate_csv_row(&s, &est, t.elapsed().as_secs_f64() * 1e3);
            let text = format!("{ESTIMATE_CSV_HEADER}\n{row}\n");
            if let Some(out) = &ctx.out {
                ensure_parent(out)?;
                std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
            }
            print!("{text}");
        }
        Command::Baseline {
            graph,
            name,
            k,
            model,
            relation,
        } => {
            if k == 0 {
                bail!("-k must be at least 1");
            }
            let g = ctx.graph(&graph)?;
            let m = ctx.model(&g, model.as_deref())?;
            let learned = match (&relation, name.needs_training()) {
                (Some(p), true) => {
                    let am = AttentionModel::load(p)?;
                    let w = extract_edge_weights(&am, &g)?;
                    Some((am, w))
                }
                (None, true) => bail!("{name} needs --relation"),
                _ => None,
            };
            let t = Instant::now();
            let seeds = baseline_seeds(
                &ctx.cfg,
                name,
                &g,
                &m,
                learned.as_ref().map(|(a, w)| (a, w)),
                k,
            )?;
            info!(
                "{name} selection took {:.1} ms",
                t.elapsed().as_secs_f64() * 1e3
            );
            write_seeds(&ctx, &seeds, &format!("seeds_{name}_k{k}.txt"))?;
        }
        Command::Pipeline => {
            let report = run_pipeline(&ctx.cfg)?;
            let dir = ctx.out_dir();
            let files = emit_report(&report, &dir, ctx.cfg.seed_files)?;
            print!("{}", report.summary());
            for f in files {
                info!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn write_seeds(ctx: &Ctx, seeds: &SeedSet, default_name: &str) -> Result<()> {
    let out = ctx.out_file(default_name);
    ensure_parent(&out)?;
    seeds.save(&out)?;
    let list: Vec<String> = seeds.order().iter().map(|v| v.to_string()).collect();
    println!("{} -> {}", list.join(" "), out.display());
    Ok(())
}
