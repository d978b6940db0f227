//! Ground-truth diffusion models: IC, LT, and their feature-parameterized
//! variants PIC and PLT.
//!
//! A PIC edge probability is `sigmoid(a * score(x_u, x_v) + b)` with
//! `score(x_u, x_v) = v . tanh(W [x_u ; x_v])`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{io, AttributedGraph};
use crate::matrix::{dot, Matrix};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "IC")]
    Ic,
    #[serde(rename = "LT")]
    Lt,
    #[serde(rename = "PIC")]
    Pic,
    #[serde(rename = "PLT")]
    Plt,
}

impl ModelKind {
    /// Threshold semantics (LT, PLT) rather than cascade semantics (IC, PIC).
    pub fn is_threshold(self) -> bool {
        matches!(self, ModelKind::Lt | ModelKind::Plt)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ic => "IC",
            ModelKind::Lt => "LT",
            ModelKind::Pic => "PIC",
            ModelKind::Plt => "PLT",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "IC" => Ok(ModelKind::Ic),
            "LT" => Ok(ModelKind::Lt),
            "PIC" => Ok(ModelKind::Pic),
            "PLT" => Ok(ModelKind::Plt),
            _ => Err(Error::Unknown {
                kind: "diffusion model",
                name: s.to_owned(),
            }),
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Parameters of the feature-conditioned score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicParams {
    /// `d x 2F`
    pub w: Matrix,
    /// length `d`
    pub v: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl PicParams {
    pub fn new(w: Matrix, v: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        let p = Self { w, v, a, b };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.w.rows() == 0 || self.w.rows() != self.v.len() || !self.w.cols().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "PIC parameters: W is {}x{}, v has {} entries",
                self.w.rows(),
                self.w.cols(),
                self.v.len()
            )));
        }
        let finite = self.w.is_finite()
            && self.v.iter().all(|x| x.is_finite())
            && self.a.is_finite()
            && self.b.is_finite();
        if !finite {
            return Err(Error::Parameter("non-finite PIC parameter".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.v.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.w.cols() / 2
    }

    /// `v . tanh(W [x_u ; x_v])`
    pub fn score(&self, xu: &[f64], xv: &[f64]) -> f64 {
        let f = xu.len();
        (0..self.width())
            .map(|r| {
                let row = self.w.row(r);
                let pre = dot(&row[..f], xu) + dot(&row[f..], xv);
                self.v[r] * pre.tanh()
            })
            .sum()
    }

    pub fn probability(&self, xu: &[f64], xv: &[f64]) -> f64 {
        sigmoid(self.a * self.score(xu, xv) + self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Hidden width `d` of the PIC score.
    pub score_width: usize,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { score_width: 8 }
    }
}

/// A diffusion model bound to a graph's edge ids.
///
/// `edge_values[e]` is the activation probability of edge `e` for IC/PIC, or
/// its threshold weight for LT/PLT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionModel {
    kind: ModelKind,
    seed: u64,
    calibration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<PicParams>,
    edge_values: Vec<f64>,
}

impl DiffusionModel {
    /// IC or LT model with explicit per-edge values.
    pub fn from_edge_values(
        kind: ModelKind,
        graph: &AttributedGraph,
        values: Vec<f64>,
    ) -> Result<Self> {
        if matches!(kind, ModelKind::Pic | ModelKind::Plt) {
            return Err(Error::Parameter(format!(
                "{kind} models are built from parameters, not edge values"
            )));
        }
        let mean = mean(&values);
        let m = Self {
            kind,
            seed: 0,
            calibration: mean,
            params: None,
            edge_values: values,
        };
        m.validate(graph)?;
        Ok(m)
    }

    /// IC model with the same probability on every edge.
    pub fn uniform_ic(graph: &AttributedGraph, p: f64) -> Result<Self> {
        Self::from_edge_values(ModelKind::Ic, graph, vec![p; graph.edge_count()])
    }

    /// PIC or PLT model from explicit parameters.
    pub fn from_pic_params(
        kind: ModelKind,
        graph: &AttributedGraph,
        params: PicParams,
    ) -> Result<Self> {
        if !matches!(kind, ModelKind::Pic | ModelKind::Plt) {
            return Err(Error::Parameter(format!("{kind} has no score parameters")));
        }
        params.validate()?;
        if params.feature_dim() != graph.feature_dim() {
            return Err(Error::Dimension(format!(
                "PIC parameters expect {} features, graph has {}",
                params.feature_dim(),
                graph.feature_dim()
            )));
        }
        let mut values = pic_edge_values(&params, graph);
        if kind == ModelKind::Plt {
            normalize_incoming(graph, &mut values);
        }
        let m = Self {
            kind,
            seed: 0,
            calibration: mean(&values),
            params: Some(params),
            edge_values: values,
        };
        m.validate(graph)?;
        Ok(m)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn calibration(&self) -> f64 {
        self.calibration
    }

    pub fn params(&self) -> Option<&PicParams> {
        self.params.as_ref()
    }

    pub fn edge_values(&self) -> &[f64] {
        &self.edge_values
    }

    #[inline]
    pub fn edge_value(&self, edge_id: usize) -> f64 {
        self.edge_values[edge_id]
    }

    pub fn validate(&self, graph: &AttributedGraph) -> Result<()> {
        if self.edge_values.len() != graph.edge_count() {
            return Err(Error::Dimension(format!(
                "model has {} edge values, graph has {} edges",
                self.edge_values.len(),
                graph.edge_count()
            )));
        }
        if let Some(e) = self
            .edge_values
            .iter()
            .position(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::Validation(format!(
                "edge {e} value {} outside [0, 1]",
                self.edge_values[e]
            )));
        }
        if self.kind.is_threshold() {
            for v in 0..graph.node_count() {
                let s: f64 = graph
                    .in_adj()
                    .edge_ids(v)
                    .iter()
                    .map(|&e| self.edge_values[e])
                    .sum();
                if s > 1.0 + 1e-9 {
                    return Err(Error::Validation(format!(
                        "incoming weight of node {v} sums to {s} > 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str, graph: &AttributedGraph) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if let Some(p) = &m.params {
            p.validate()?;
        }
        m.validate(graph)?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write(path, &self.to_json()?)
    }

    pub fn load(path: &Path, graph: &AttributedGraph) -> Result<Self> {
        Self::from_json(&io::read(path)?, graph)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn pic_edge_values(params: &PicParams, graph: &AttributedGraph) -> Vec<f64> {
    let x = graph.features();
    graph
        .edges()
        .iter()
        .map(|&(u, v)| params.probability(x.row(u), x.row(v)))
        .collect()
}

/// Divides each node's incoming values by `max(1, incoming sum)`.
fn normalize_incoming(graph: &AttributedGraph, values: &mut [f64]) {
    for v in 0..graph.node_count() {
        let ids = graph.in_adj().edge_ids(v);
        let s: f64 = ids.iter().map(|&e| values[e]).sum();
        if s > 1.0 {
            for &e in ids {
                values[e] /= s;
            }
        }
    }
}

/// Generates a random model of `kind` whose mean edge value is `calibration`.
pub fn make_model(
    kind: ModelKind,
    graph: &AttributedGraph,
    rng_seed: u64,
    calibration: f64,
) -> Result<DiffusionModel> {
    make_model_with(kind, graph, rng_seed, calibration, &ModelOptions::default())
}

pub fn make_model_with(
    kind: ModelKind,
    graph: &AttributedGraph,
    rng_seed: u64,
    calibration: f64,
    opts: &ModelOptions,
) -> Result<DiffusionModel> {
    if !(calibration > 0.0 && calibration < 1.0) {
        return Err(Error::Parameter(format!(
            "calibration {calibration} must lie in (0, 1)"
        )));
    }
    if opts.score_width == 0 {
        return Err(Error::Parameter("score width must be >= 1".into()));
    }
    let mut r = rng::rng(rng_seed);
    let (params, mut values) = match kind {
        ModelKind::Ic | ModelKind::Lt => {
            let hi = 2.0 * calibration;
            let values = (0..graph.edge_count())
                .map(|_| (r.random::<f64>() * hi).min(1.0))
                .collect();
            (None, values)
        }
        ModelKind::Pic | ModelKind::Plt => {
            if graph.feature_dim() == 0 {
                return Err(Error::MissingFeatures(kind.name()));
            }
            let f = graph.feature_dim();
            let d = opts.score_width;
            let w = Matrix::from_fn(d, 2 * f, |_, _| StandardNormal.sample(&mut r));
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
            let mut params = PicParams::new(w, v, 1.0, 0.0)?;
            params.b = calibrate_offset(&params, graph, calibration);
            let values = pic_edge_values(&params, graph);
            (Some(params), values)
        }
    };
    if kind.is_threshold() {
        normalize_incoming(graph, &mut values);
    }
    let m = DiffusionModel {
        kind,
        seed: rng_seed,
        calibration,
        params,
        edge_values: values,
    };
    m.validate(graph)?;
    Ok(m)
}

/// Bisection on `b` so the mean edge probability hits `target`.
fn calibrate_offset(params: &PicParams, graph: &AttributedGraph, target: f64) -> f64 {
    let x = graph.features();
    let scores: Vec<f64> = graph
        .edges()
        .iter()
        .map(|&(u, v)| params.a * params.score(x.row(u), x.row(v)))
        .collect();
    if scores.is_empty() {
        return (target / (1.0 - target)).ln();
    }
    let mean_p = |b: f64| scores.iter().map(|s| sigmoid(s + b)).sum::<f64>() / scores.len() as f64;
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_p(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Probability (IC/PIC) or weight (LT/PLT) of edge `(u, v)`.
///
/// PIC values are recomputed from `x`; the other kinds read the table built
/// at construction.
pub fn edge_probability(
    model: &DiffusionModel,
    graph: &AttributedGraph,
    u: usize,
    v: usize,
    x: &Matrix,
) -> Result<f64> {
    let e = graph.edge_id(u, v).ok_or(Error::NotAnEdge(u, v))?;
    match (model.kind, &model.params) {
        (ModelKind::Pic, Some(p)) => Ok(p.probability(x.row(u), x.row(v))),
        _ => Ok(model.edge_values[e]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::{community_graph, SyntheticGraphConfig};
    use proptest::prelude::*;

    fn synthetic(seed: u64) -> AttributedGraph {
        let cfg = SyntheticGraphConfig {
            nodes: 200,
            avg_degree: 8.0,
            ..Default::default()
        };
        community_graph(&cfg, seed).unwrap()
    }

    #[test]
    fn ic_single_edge_in_range() {
        let g = AttributedGraph::with_degree_features(2, vec![(0, 1)]).unwrap();
        let m = make_model(ModelKind::Ic, &g, 3, 0.5).unwrap();
        let p = edge_probability(&m, &g, 0, 1, g.features()).unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!(edge_probability(&m, &g, 1, 0, g.features()).is_err());
    }

    #[test]
    fn pic_calibrates_mean_probability() {
        let g = synthetic(11);
        assert!(g.edge_count() >= 1000, "{}", g.edge_count());
        let m = make_model(ModelKind::Pic, &g, 5, 0.05).unwrap();
        // independent recomputation over all edges
        let p = m.params().unwrap();
        let x = g.features();
        let mean: f64 = g
            .edges()
            .iter()
            .map(|&(u, v)| {
                let z: Vec<f64> = x.row(u).iter().chain(x.row(v)).copied().collect();
                let s: f64 = (0..p.w.rows())
                    .map(|r| p.v[r] * dot(p.w.row(r), &z).tanh())
                    .sum();
                1.0 / (1.0 + (-(p.a * s + p.b)).exp())
            })
            .sum::<f64>()
            / g.edge_count() as f64;
        assert!((0.049..=0.051).contains(&mean), "{mean}");
    }

    #[test]
    fn lt_normalizes_star_into_center() {
        let g =
            AttributedGraph::with_degree_features(5, vec![(1, 0), (2, 0), (3, 0), (4, 0)]).unwrap();
        let mut values = vec![0.5; 4];
        normalize_incoming(&g, &mut values);
        assert!(values.iter().all(|&w| (w - 0.25).abs() < 1e-15));
        let m = DiffusionModel::from_edge_values(ModelKind::Lt, &g, values).unwrap();
        assert_eq!(m.kind(), ModelKind::Lt);
        assert!(DiffusionModel::from_edge_values(ModelKind::Lt, &g, vec![0.5; 4]).is_err());
    }

    #[test]
    fn pic_zero_weights_give_sigmoid_offset() {
        let g = synthetic(2);
        let params = PicParams::new(
            Matrix::zeros(4, 2 * g.feature_dim()),
            vec![1.0; 4],
            1.0,
            -1.5,
        )
        .unwrap();
        let m = DiffusionModel::from_pic_params(ModelKind::Pic, &g, params).unwrap();
        assert!(m.edge_values().iter().all(|&p| p == sigmoid(-1.5)));
    }

    #[test]
    fn pic_zero_scale_ignores_features() {
        let g = synthetic(3);
        let f = g.feature_dim();
        let w = Matrix::from_fn(3, 2 * f, |i, j| (i + j) as f64 * 0.3 - 1.0);
        let params = PicParams::new(w, vec![1.0, -2.0, 0.5], 0.0, 0.7).unwrap();
        let m = DiffusionModel::from_pic_params(ModelKind::Pic, &g, params).unwrap();
        assert!(m.edge_values().iter().all(|&p| p == sigmoid(0.7)));
    }

    #[test]
    fn pic_hand_evaluated_half() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.0]]);
        let g = AttributedGraph::new(2, vec![(0, 1)], x).unwrap();
        let params =
            PicParams::new(Matrix::from_rows(&[vec![1.0, 1.0]]), vec![1.0], 1.0, 0.0).unwrap();
        let m = DiffusionModel::from_pic_params(ModelKind::Pic, &g, params).unwrap();
        assert_eq!(edge_probability(&m, &g, 0, 1, g.features()).unwrap(), 0.5);
    }

    #[test]
    fn calibration_bounds_and_features() {
        let g = synthetic(4);
        assert!(matches!(
            make_model(ModelKind::Ic, &g, 0, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            make_model(ModelKind::Pic, &g, 0, 1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = synthetic(5);
        for kind in [ModelKind::Ic, ModelKind::Lt, ModelKind::Pic, ModelKind::Plt] {
            let m = make_model(kind, &g, 9, 0.1).unwrap();
            let back = DiffusionModel::from_json(&m.to_json().unwrap(), &g).unwrap();
            assert_eq!(back, m, "{kind}");
        }
    }

    #[test]
    fn threshold_models_respect_incoming_budget() {
        let g = synthetic(6);
        for kind in [ModelKind::Lt, ModelKind::Plt] {
            let m = make_model(kind, &g, 1, 0.3).unwrap();
            for v in 0..g.node_count() {
                let s: f64 = g
                    .in_adj()
                    .edge_ids(v)
                    .iter()
                    .map(|&e| m.edge_value(e))
                    .sum();
                assert!(s <= 1.0 + 1e-12, "{kind} node {v}: {s}");
            }
        }
    }

    proptest! {
        #[test]
        fn pic_probabilities_strictly_inside_unit_interval(seed in 0u64..50, cal in 0.01f64..0.9) {
            let g = synthetic(seed % 3);
            let m = make_model(ModelKind::Pic, &g, seed, cal).unwrap();
            prop_assert!(m.edge_values().iter().all(|&p| p > 0.0 && p < 1.0));
        }

        #[test]
        fn identical_features_identical_probability(seed in 0u64..50, xs in proptest::collection::vec(-2.0f64..2.0, 4)) {
            // nodes 0,2 share features and so do 1,3
            let x = Matrix::from_rows(&[
                vec![xs[0], xs[1]], vec![xs[2], xs[3]], vec![xs[0], xs[1]], vec![xs[2], xs[3]],
            ]);
            let g = AttributedGraph::new(4, vec![(0, 1), (2, 3)], x).unwrap();
            let m = make_model(ModelKind::Pic, &g, seed, 0.2).unwrap();
            prop_assert_eq!(m.edge_value(0), m.edge_value(1));
        }
    }
}
