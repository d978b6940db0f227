use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, DiffusionDataset};
use crate::matrix::Matrix;
use crate::relation::chains::build_chains;
use crate::relation::gat::{Architecture, AttentionModel, Neighborhoods};
use crate::relation::skipgram::{skipgram_loss, SkipGramBatch};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Negative samples per positive pair (K).
    pub negatives: usize,
    /// Skip-gram window over diffusion chains.
    pub window: usize,
    pub batch_size: usize,
    pub walks_per_pair: usize,
    pub max_chain_len: usize,
    /// Rescale each batch gradient to at most this global L2 norm.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::default(),
            epochs: 100,
            learning_rate: 0.01,
            momentum: 0.9,
            negatives: 5,
            window: 2,
            batch_size: 256,
            walks_per_pair: 1,
            max_chain_len: 6,
            clip_norm: Some(5.0),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.negatives == 0 || self.window == 0 || self.batch_size == 0 {
            return Err(Error::Parameter(
                "negatives, window and batch size must be >= 1".into(),
            ));
        }
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(Error::Parameter(
                "learning rate must be > 0 and momentum in [0, 1)".into(),
            ));
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Parameter("clip norm must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainedRelationModel {
    pub model: AttentionModel,
    /// Mean per-positive loss of each epoch.
    pub loss_history: Vec<f64>,
    pub positives: usize,
}

/// Mean loss over `batch` and its gradient w.r.t. every attention parameter.
pub fn end_to_end_loss(
    model: &AttentionModel,
    nb: &Neighborhoods,
    x: &Matrix,
    batch: &SkipGramBatch,
) -> Result<(f64, AttentionModel)> {
    let pass = model.forward(nb, x)?;
    let (loss, mut dz) = skipgram_loss(&pass.embeddings, batch);
    let scale = 1.0 / batch.positives.len().max(1) as f64;
    dz.as_mut_slice().iter_mut().for_each(|g| *g *= scale);
    Ok((loss * scale, model.backward(nb, &pass, &dz)))
}

pub fn train_relation_model(
    graph: &AttributedGraph,
    dataset: &DiffusionDataset,
    config: &TrainConfig,
) -> Result<TrainedRelationModel> {
    config.validate()?;
    dataset.validate(graph)?;
    if graph.node_count() < 2 {
        return Err(Error::Parameter("training needs at least two nodes".into()));
    }
    let mut init_rng = rng::rng(rng::stage(config.seed, "init"));
    let mut model = AttentionModel::init(graph.feature_dim(), &config.architecture, &mut init_rng)?;
    let corpus = build_chains(
        dataset,
        config.walks_per_pair,
        config.max_chain_len,
        rng::stage(config.seed, "chains"),
    )?;
    let mut positives = corpus.context_pairs(config.window);
    let n_pos = positives.len();
    let nb = Neighborhoods::new(graph);
    let x = graph.features();
    let mut velocity = model.zeros_like();
    let mut r = rng::rng(rng::stage(config.seed, "epochs"));
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        positives.shuffle(&mut r);
        let mut total = 0.0;
        for chunk in positives.chunks(config.batch_size) {
            let batch =
                SkipGramBatch::sample(chunk.to_vec(), graph.node_count(), config.negatives, &mut r);
            let (loss, grads) = end_to_end_loss(&model, &nb, x, &batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    detail: format!("batch loss {loss}"),
                });
            }
            total += loss * chunk.len() as f64;
            let norm = grads
                .params()
                .iter()
                .flat_map(|g| g.iter())
                .map(|g| g * g)
                .sum::<f64>()
                .sqrt();
            let step = match config.clip_norm {
                Some(c) if norm > c => config.learning_rate * c / norm,
                _ => config.learning_rate,
            };
            for ((p, v), g) in model
                .params_mut()
                .into_iter()
                .zip(velocity.params_mut())
                .zip(grads.params())
            {
                for ((pi, vi), gi) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                    *vi = config.momentum * *vi - step * gi;
                    *pi += *vi;
                }
            }
        }
        if !model.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: "non-finite parameters".into(),
            });
        }
        let mean = total / n_pos.max(1) as f64;
        debug!("epoch {epoch}: loss {mean:.5}");
        history.push(mean);
    }
    Ok(TrainedRelationModel {
        model,
        loss_history: history,
        positives: n_pos,
    })
}
