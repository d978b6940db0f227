use dscom_core::cascade::{generate_dataset, DatasetOptions};
use dscom_core::graph::synthetic::{community_graph, SyntheticGraphConfig};
use dscom_core::relation::{train_relation_model, TrainConfig};
use dscom_core::{make_model, rng, ModelKind};

fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    xs.windows(w)
        .map(|s| s.iter().sum::<f64>() / w as f64)
        .collect()
}

#[test]
fn loss_moving_average_does_not_increase() {
    let master = 0;
    let g = community_graph(
        &SyntheticGraphConfig::default(),
        rng::stage(master, "graph"),
    )
    .unwrap();
    let m = make_model(ModelKind::Pic, &g, rng::stage(master, "model"), 0.1).unwrap();
    let ds = generate_dataset(
        &g,
        &m,
        1000,
        &DatasetOptions::default(),
        rng::stage(master, "dataset"),
    )
    .unwrap()
    .dataset;
    let cfg = TrainConfig {
        seed: rng::stage(master, "train"),
        ..TrainConfig::default()
    };
    let trained = train_relation_model(&g, &ds, &cfg).unwrap();
    let avg = moving_average(&trained.loss_history, 10);
    assert!(!avg.is_empty());
    let rises: Vec<(usize, f64)> = avg
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .map(|(i, w)| (i + 10, w[1] - w[0]))
        .collect();
    assert!(rises.is_empty(), "moving average rose at {rises:?}");
}
