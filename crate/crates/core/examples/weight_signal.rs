//! Trains the relation model on synthetic PIC cascades and reports how well
//! the extracted attention weights rank the true edge probabilities.
//!
//! `cargo run --release --example weight_signal -- [seeds]`

use std::time::Instant;

use dscom_core::cascade::{generate_dataset, DatasetOptions};
use dscom_core::graph::synthetic::{community_graph, SyntheticGraphConfig};
use dscom_core::relation::{extract_edge_weights, train_relation_model, TrainConfig};
use dscom_core::{make_model, rng, stats, ModelKind};

fn main() -> dscom_core::Result<()> {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let mut rhos = Vec::new();
    for master in 0..seeds {
        let g = community_graph(
            &SyntheticGraphConfig::default(),
            rng::stage(master, "graph"),
        )?;
        let m = make_model(ModelKind::Pic, &g, rng::stage(master, "model"), 0.1)?;
        let ds = generate_dataset(
            &g,
            &m,
            1000,
            &DatasetOptions::default(),
            rng::stage(master, "dataset"),
        )?
        .dataset;

        // how much the raw pair counts alone say about p
        let mult = ds.multiplicities();
        let counts: Vec<f64> = g
            .edges()
            .iter()
            .map(|e| *mult.get(e).unwrap_or(&0) as f64)
            .collect();

        let cfg = TrainConfig {
            seed: rng::stage(master, "train"),
            ..TrainConfig::default()
        };
        let t = Instant::now();
        let trained = train_relation_model(&g, &ds, &cfg)?;
        let weights = extract_edge_weights(&trained.model, &g)?;
        let rho = stats::spearman(weights.weights(), m.edge_values());
        println!(
            "seed {master}: {} edges, loss {:.3} -> {:.3}, rho(alpha, p) {rho:.3}, rho(count, p) {:.3}, {:.1}s",
            g.edge_count(),
            trained.loss_history.first().unwrap_or(&f64::NAN),
            trained.loss_history.last().unwrap_or(&f64::NAN),
            stats::spearman(&counts, m.edge_values()),
            t.elapsed().as_secs_f64()
        );
        rhos.push(rho);
    }
    println!("median rho {:.3}", stats::median(&rhos));
    Ok(())
}
