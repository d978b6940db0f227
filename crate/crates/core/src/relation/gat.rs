//! Multi-head graph attention layers with hand-written backpropagation.
//!
//! For target node `i` and candidate `j` in `in_neighbors(i) ∪ {i}`:
//!
//! ```text
//! e_ij     = LeakyReLU(a_dst . W h_i + a_src . W h_j)
//! alpha_ij = softmax_j(e_ij)
//! out_i    = sum_j alpha_ij W h_j
//! ```
//!
//! Hidden layers concatenate their heads and apply ELU; the output layer
//! averages its heads.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::matrix::{axpy, dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Concat,
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionHead {
    /// `out x in`
    pub w: Matrix,
    /// `[a_dst ; a_src]`, length `2 * out`.
    pub a: Vec<f64>,
}

impl AttentionHead {
    fn out_dim(&self) -> usize {
        self.w.rows()
    }

    fn a_dst(&self) -> &[f64] {
        &self.a[..self.out_dim()]
    }

    fn a_src(&self) -> &[f64] {
        &self.a[self.out_dim()..]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionLayer {
    pub heads: Vec<AttentionHead>,
    pub combine: Combine,
}

impl AttentionLayer {
    pub fn in_dim(&self) -> usize {
        self.heads[0].w.cols()
    }

    pub fn head_dim(&self) -> usize {
        self.heads[0].w.rows()
    }

    pub fn out_dim(&self) -> usize {
        match self.combine {
            Combine::Concat => self.head_dim() * self.heads.len(),
            Combine::Average => self.head_dim(),
        }
    }
}

/// Layer shapes of an [`AttentionModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    /// `(heads, per-head width)` for each hidden layer.
    pub hidden: Vec<(usize, usize)>,
    pub output_heads: usize,
    pub output_dim: usize,
    pub leaky_slope: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            hidden: vec![(4, 8)],
            output_heads: 1,
            output_dim: 16,
            leaky_slope: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionModel {
    pub layers: Vec<AttentionLayer>,
    pub leaky_slope: f64,
}

/// Per-target candidate lists: slot 0 is the node itself, then its
/// in-neighbors in ascending order.
#[derive(Debug, Clone)]
pub struct Neighborhoods {
    offsets: Vec<usize>,
    nodes: Vec<usize>,
}

impl Neighborhoods {
    pub fn new(graph: &AttributedGraph) -> Self {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut nodes = Vec::with_capacity(n + graph.edge_count());
        offsets.push(0);
        for i in 0..n {
            nodes.push(i);
            nodes.extend_from_slice(graph.in_neighbors(i));
            offsets.push(nodes.len());
        }
        Self { offsets, nodes }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    #[inline]
    pub fn candidates(&self, i: usize) -> &[usize] {
        &self.nodes[self.range(i)]
    }

    pub fn slot_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Attention coefficients of one head, flat and aligned with [`Neighborhoods`].
pub type HeadAttention = Vec<f64>;

struct HeadCache {
    projected: Matrix,
    pre: Vec<f64>,
    alpha: Vec<f64>,
}

struct LayerCache {
    input: Matrix,
    heads: Vec<HeadCache>,
    /// Pre-ELU combined output of hidden layers.
    combined: Option<Matrix>,
}

/// Everything the backward pass needs.
pub struct ForwardPass {
    pub embeddings: Matrix,
    layers: Vec<LayerCache>,
}

impl ForwardPass {
    /// `attention()[layer][head]`
    pub fn attention(&self) -> Vec<Vec<&[f64]>> {
        self.layers
            .iter()
            .map(|l| l.heads.iter().map(|h| h.alpha.as_slice()).collect())
            .collect()
    }
}

#[inline]
fn leaky(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

#[inline]
fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

#[inline]
fn elu_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

impl AttentionModel {
    /// Glorot-uniform initialization.
    pub fn init<R: Rng>(input_dim: usize, arch: &Architecture, rng: &mut R) -> Result<Self> {
        if input_dim == 0 || arch.output_heads == 0 || arch.output_dim == 0 {
            return Err(Error::Parameter(
                "attention model dimensions must be >= 1".into(),
            ));
        }
        if arch.hidden.iter().any(|&(h, d)| h == 0 || d == 0) {
            return Err(Error::Parameter(
                "hidden layers need >= 1 head and width".into(),
            ));
        }
        let mut layers = Vec::new();
        let mut fan_in = input_dim;
        let shapes = arch
            .hidden
            .iter()
            .map(|&(h, d)| (h, d, Combine::Concat))
            .chain(std::iter::once((
                arch.output_heads,
                arch.output_dim,
                Combine::Average,
            )));
        for (heads, width, combine) in shapes {
            let mut hs = Vec::with_capacity(heads);
            for _ in 0..heads {
                let lim = (6.0 / (fan_in + width) as f64).sqrt();
                let w = Matrix::from_fn(width, fan_in, |_, _| rng.random_range(-lim..lim));
                let alim = (6.0 / (2 * width + 1) as f64).sqrt();
                let a = (0..2 * width)
                    .map(|_| rng.random_range(-alim..alim))
                    .collect();
                hs.push(AttentionHead { w, a });
            }
            let layer = AttentionLayer { heads: hs, combine };
            fan_in = layer.out_dim();
            layers.push(layer);
        }
        Ok(Self {
            layers,
            leaky_slope: arch.leaky_slope,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, AttentionLayer::out_dim)
    }

    /// Same shapes, all parameters zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.params_mut().into_iter().for_each(|p| p.fill(0.0));
        z
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut v = Vec::new();
        for l in &self.layers {
            for h in &l.heads {
                v.push(h.w.as_slice());
                v.push(h.a.as_slice());
            }
        }
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = Vec::new();
        for l in &mut self.layers {
            for h in &mut l.heads {
                v.push(h.w.as_mut_slice());
                v.push(h.a.as_mut_slice());
            }
        }
        v
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params()
            .iter()
            .all(|p| p.iter().all(|x| x.is_finite()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Parameter("attention model has no layers".into()));
        }
        let mut dim = self.input_dim();
        for (li, l) in self.layers.iter().enumerate() {
            if l.heads.is_empty() {
                return Err(Error::Parameter(format!("layer {li} has no heads")));
            }
            for h in &l.heads {
                if h.w.cols() != dim || h.w.rows() != l.head_dim() || h.a.len() != 2 * h.w.rows() {
                    return Err(Error::Dimension(format!("layer {li} shapes do not chain")));
                }
            }
            dim = l.out_dim();
        }
        if !self.is_finite() {
            return Err(Error::Numeric("non-finite attention parameter".into()));
        }
        Ok(())
    }

    pub fn forward(&self, nb: &Neighborhoods, x: &Matrix) -> Result<ForwardPass> {
        if x.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} columns, model expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        if x.rows() != nb.node_count() {
            return Err(Error::Dimension(format!(
                "input has {} rows for {} nodes",
                x.rows(),
                nb.node_count()
            )));
        }
        let n = x.rows();
        let last = self.layers.len() - 1;
        let mut input = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let hd = layer.head_dim();
            let heads: Vec<HeadCache> = layer
                .heads
                .iter()
                .map(|h| head_forward(h, nb, &input, self.leaky_slope))
                .collect();
            let mut out = Matrix::zeros(n, layer.out_dim());
            let scale = 1.0 / layer.heads.len() as f64;
            for (hi, hc) in heads.iter().enumerate() {
                for i in 0..n {
                    let row = out.row_mut(i);
                    let dst = match layer.combine {
                        Combine::Concat => &mut row[hi * hd..(hi + 1) * hd],
                        Combine::Average => &mut row[..],
                    };
                    let s = if layer.combine == Combine::Average {
                        scale
                    } else {
                        1.0
                    };
                    for (slot, &j) in nb.range(i).zip(nb.candidates(i)) {
                        axpy(s * hc.alpha[slot], hc.projected.row(j), dst);
                    }
                }
            }
            let (next, combined) = if li < last {
                let mut act = out.clone();
                act.as_mut_slice().iter_mut().for_each(|v| *v = elu(*v));
                (act, Some(out))
            } else {
                (out, None)
            };
            caches.push(LayerCache {
                input: std::mem::replace(&mut input, next),
                heads,
                combined,
            });
        }
        Ok(ForwardPass {
            embeddings: input,
            layers: caches,
        })
    }

    /// Gradient of a scalar loss w.r.t. every parameter, given its gradient
    /// w.r.t. the output embeddings.
    pub fn backward(
        &self,
        nb: &Neighborhoods,
        pass: &ForwardPass,
        grad_out: &Matrix,
    ) -> AttentionModel {
        let mut grads = self.zeros_like();
        let n = nb.node_count();
        let mut upstream = grad_out.clone();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let cache = &pass.layers[li];
            if let Some(pre) = &cache.combined {
                for (g, &p) in upstream.as_mut_slice().iter_mut().zip(pre.as_slice()) {
                    *g *= elu_grad(p);
                }
            }
            let hd = layer.head_dim();
            let scale = 1.0 / layer.heads.len() as f64;
            let mut grad_input = Matrix::zeros(n, layer.in_dim());
            for (hi, (head, hc)) in layer.heads.iter().zip(&cache.heads).enumerate() {
                let d_out = Matrix::from_fn(n, hd, |i, k| match layer.combine {
                    Combine::Concat => upstream.get(i, hi * hd + k),
                    Combine::Average => scale * upstream.get(i, k),
                });
                let gh = &mut grads.layers[li].heads[hi];
                head_backward(
                    head,
                    hc,
                    nb,
                    &cache.input,
                    &d_out,
                    self.leaky_slope,
                    gh,
                    &mut grad_input,
                );
            }
            upstream = grad_input;
        }
        grads
    }
}

fn head_forward(head: &AttentionHead, nb: &Neighborhoods, input: &Matrix, slope: f64) -> HeadCache {
    let n = input.rows();
    let od = head.out_dim();
    let mut projected = Matrix::zeros(n, od);
    for i in 0..n {
        let xi = input.row(i);
        let pi = projected.row_mut(i);
        for (o, p) in pi.iter_mut().enumerate() {
            *p = dot(head.w.row(o), xi);
        }
    }
    let s_dst: Vec<f64> = (0..n)
        .map(|i| dot(head.a_dst(), projected.row(i)))
        .collect();
    let s_src: Vec<f64> = (0..n)
        .map(|i| dot(head.a_src(), projected.row(i)))
        .collect();
    let mut pre = vec![0.0; nb.slot_count()];
    let mut alpha = vec![0.0; nb.slot_count()];
    for i in 0..n {
        let r = nb.range(i);
        let mut max = f64::NEG_INFINITY;
        for (slot, &j) in r.clone().zip(nb.candidates(i)) {
            pre[slot] = s_dst[i] + s_src[j];
            max = max.max(leaky(pre[slot], slope));
        }
        let mut z = 0.0;
        for slot in r.clone() {
            let e = (leaky(pre[slot], slope) - max).exp();
            alpha[slot] = e;
            z += e;
        }
        for slot in r {
            alpha[slot] /= z;
        }
    }
    HeadCache {
        projected,
        pre,
        alpha,
    }
}

#[allow(clippy::too_many_arguments)]
fn head_backward(
    head: &AttentionHead,
    hc: &HeadCache,
    nb: &Neighborhoods,
    input: &Matrix,
    d_out: &Matrix,
    slope: f64,
    grad: &mut AttentionHead,
    grad_input: &mut Matrix,
) {
    let n = input.rows();
    let od = head.out_dim();
    let mut d_proj = Matrix::zeros(n, od);
    let mut ds_dst = vec![0.0; n];
    let mut ds_src = vec![0.0; n];
    let mut d_alpha = Vec::new();
    for i in 0..n {
        let r = nb.range(i);
        let cands = nb.candidates(i);
        let go = d_out.row(i);
        d_alpha.clear();
        for (slot, &j) in r.clone().zip(cands) {
            d_alpha.push(dot(go, hc.projected.row(j)));
            axpy(hc.alpha[slot], go, d_proj.row_mut(j));
        }
        let mean: f64 = r.clone().zip(&d_alpha).map(|(s, d)| hc.alpha[s] * d).sum();
        for ((slot, &j), &da) in r.zip(cands).zip(&d_alpha) {
            let de = hc.alpha[slot] * (da - mean);
            let dpre = if hc.pre[slot] > 0.0 { de } else { slope * de };
            ds_dst[i] += dpre;
            ds_src[j] += dpre;
        }
    }
    let (ga_dst, ga_src) = grad.a.split_at_mut(od);
    for i in 0..n {
        axpy(ds_dst[i], hc.projected.row(i), ga_dst);
        axpy(ds_src[i], hc.projected.row(i), ga_src);
        let row = d_proj.row_mut(i);
        axpy(ds_dst[i], head.a_dst(), row);
        axpy(ds_src[i], head.a_src(), row);
    }
    for i in 0..n {
        let dp = d_proj.row(i);
        let xi = input.row(i);
        let gi = grad_input.row_mut(i);
        for (o, &g) in dp.iter().enumerate() {
            if g != 0.0 {
                axpy(g, xi, grad.w.row_mut(o));
                axpy(g, head.w.row(o), gi);
            }
        }
    }
}
