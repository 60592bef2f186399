// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{encode_features, DataFlowGraph, FeatureMatrix, GraphError};
use crate::node::{Dialect, Label};

use super::layers::{classify, cross_entropy, pool_size, readout, top_k, Readout};
use super::sparse::Csr;
use super::GnnError;

/// Architecture and regularization; everything a checkpoint needs besides weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub dialect: Dialect,
    pub input_dim: usize,
    /// Width of each GCN layer.
    pub hidden: Vec<usize>,
    pub pool_ratio: f64,
    pub readout: Readout,
    pub dropout: f64,
}

impl ModelConfig {
    /// Two 200-unit layers, pooling ratio 0.8.
    pub fn rtl_default() -> Self {
        ModelConfig {
            dialect: Dialect::Rtl,
            input_dim: crate::graph::vocab::RTL_SIZE,
            hidden: vec![200, 200],
            pool_ratio: 0.8,
            readout: Readout::Max,
            dropout: 0.5,
        }
    }

    /// Three 55-unit layers, pooling ratio 0.6.
    pub fn netlist_default() -> Self {
        ModelConfig {
            dialect: Dialect::Netlist,
            input_dim: crate::graph::vocab::NETLIST_SIZE,
            hidden: vec![55, 55, 55],
            pool_ratio: 0.6,
            readout: Readout::Max,
            dropout: 0.5,
        }
    }

    pub fn for_dialect(dialect: Dialect) -> Self {
        match dialect {
            Dialect::Rtl => Self::rtl_default(),
            Dialect::Netlist => Self::netlist_default(),
        }
    }

    pub fn embedding_dim(&self) -> usize {
        *self.hidden.last().expect("at least one GCN layer")
    }

    pub fn validate(&self) -> Result<(), GnnError> {
        let bad = |m: String| Err(GnnError::InvalidConfig(m));
        if self.hidden.is_empty() || self.hidden.contains(&0) || self.input_dim == 0 {
            return bad(format!("layer widths must be positive (input {}, hidden {:?})", self.input_dim, self.hidden));
        }
        if !(self.pool_ratio > 0.0 && self.pool_ratio <= 1.0) {
            return bad(format!("pooling ratio {} not in (0, 1]", self.pool_ratio));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} not in [0, 1)", self.dropout));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// `gcn[l]` is `d_l x d_{l+1}`.
    pub gcn: Vec<Array2<f64>>,
    /// Scoring layer weights, one per embedding column.
    pub score: Array1<f64>,
    /// `H x 2`.
    pub mlp_w: Array2<f64>,
    pub mlp_b: Array1<f64>,
}

fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit);
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

impl ModelParams {
    /// Glorot-uniform weights, zero bias.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self, GnnError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![config.input_dim];
        dims.extend(&config.hidden);
        let gcn = dims.windows(2).map(|w| glorot(w[0], w[1], &mut rng)).collect();
        let h = config.embedding_dim();
        let score = glorot(h, 1, &mut rng).column(0).to_owned();
        let mlp_w = glorot(h, 2, &mut rng);
        Ok(ModelParams { config, gcn, score, mlp_w, mlp_b: Array1::zeros(2) })
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            config: self.config.clone(),
            gcn: self.gcn.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            score: Array1::zeros(self.score.len()),
            mlp_w: Array2::zeros(self.mlp_w.raw_dim()),
            mlp_b: Array1::zeros(2),
        }
    }

    /// Every parameter block as a flat slice, in checkpoint order.
    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.gcn.iter().map(|w| w.as_slice().expect("standard layout")).collect();
        out.push(self.score.as_slice().expect("standard layout"));
        out.push(self.mlp_w.as_slice().expect("standard layout"));
        out.push(self.mlp_b.as_slice().expect("standard layout"));
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> =
            self.gcn.iter_mut().map(|w| w.as_slice_mut().expect("standard layout")).collect();
        out.push(self.score.as_slice_mut().expect("standard layout"));
        out.push(self.mlp_w.as_slice_mut().expect("standard layout"));
        out.push(self.mlp_b.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, scale: f64, other: &ModelParams) {
        for (dst, src) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeFeatures {
    OneHot(FeatureMatrix),
    Dense(Array2<f64>),
}

impl NodeFeatures {
    pub fn rows(&self) -> usize {
        match self {
            NodeFeatures::OneHot(f) => f.rows(),
            NodeFeatures::Dense(x) => x.nrows(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NodeFeatures::OneHot(f) => f.dim,
            NodeFeatures::Dense(x) => x.ncols(),
        }
    }

    /// `X W`; one-hot rows gather rows of `W`.
    pub fn matmul(&self, w: ArrayView2<f64>) -> Array2<f64> {
        match self {
            NodeFeatures::OneHot(f) => w.select(Axis(0), &f.hot),
            NodeFeatures::Dense(x) => x.dot(&w),
        }
    }

    /// `X^T G`.
    pub fn t_matmul(&self, g: ArrayView2<f64>) -> Array2<f64> {
        match self {
            NodeFeatures::OneHot(f) => {
                let mut out = Array2::zeros((f.dim, g.ncols()));
                for (i, &c) in f.hot.iter().enumerate() {
                    let mut row = out.row_mut(c);
                    row += &g.row(i);
                }
                out
            }
            NodeFeatures::Dense(x) => x.t().dot(&g),
        }
    }
}

/// A graph ready for the network.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInput {
    pub adj: Csr,
    pub features: NodeFeatures,
}

impl GraphInput {
    pub fn new(adj: Csr, features: NodeFeatures) -> Self {
        GraphInput { adj, features }
    }

    pub fn from_graph(g: &DataFlowGraph) -> Result<Self, GraphError> {
        let features = encode_features(g)?;
        Ok(Self::from_parts(g, features))
    }

    pub fn from_parts(g: &DataFlowGraph, features: FeatureMatrix) -> Self {
        GraphInput { adj: Csr::normalized(g.len(), &g.edges), features: NodeFeatures::OneHot(features) }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.n
    }
}

/// Where dropout masks come from during a forward pass.
pub enum Dropout<'a> {
    /// Inference: no dropout.
    Off,
    /// Fresh inverted-dropout masks at the model's rate.
    Sample(&'a mut ChaCha8Rng),
    /// Caller-supplied masks, one per GCN layer, already scaled.
    Fixed(&'a [Array2<f64>]),
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Pre-activation `A_norm H_l W_l` per layer.
    pub pre: Vec<Array2<f64>>,
    /// Layer outputs after ReLU and dropout; `outputs[l]` feeds layer `l + 1`.
    pub outputs: Vec<Array2<f64>>,
    pub masks: Vec<Option<Array2<f64>>>,
    pub scores: Array1<f64>,
    pub perm: Vec<usize>,
    pub pooled: Array2<f64>,
    /// Per column, pooled row holding the max (max readout only).
    pub argmax: Vec<usize>,
    pub embedding: Array1<f64>,
    pub probs: [f64; 2],
}

impl ForwardCache {
    pub fn label(&self) -> Label {
        // ties go to the first class
        Label::from_class(if self.probs[0] >= self.probs[1] { 0 } else { 1 })
    }
}

pub fn forward(params: &ModelParams, input: &GraphInput, dropout: Dropout<'_>) -> Result<ForwardCache, GnnError> {
    let cfg = &params.config;
    let n = input.num_nodes();
    if n == 0 {
        return Err(GnnError::EmptyGraph);
    }
    if input.features.rows() != n || input.features.dim() != cfg.input_dim {
        return Err(GnnError::DimensionMismatch(format!(
            "graph has {} nodes and {} features; model expects {} features",
            input.features.rows(),
            input.features.dim(),
            cfg.input_dim
        )));
    }
    let mut dropout = dropout;
    let mut pre = Vec::with_capacity(params.gcn.len());
    let mut outputs: Vec<Array2<f64>> = Vec::with_capacity(params.gcn.len());
    let mut masks = Vec::with_capacity(params.gcn.len());
    for (l, w) in params.gcn.iter().enumerate() {
        let xw = match l {
            0 => input.features.matmul(w.view()),
            _ => outputs[l - 1].dot(w),
        };
        let z = input.adj.matmul(xw.view());
        let mut h = z.mapv(|v| v.max(0.0));
        let mask = match &mut dropout {
            Dropout::Off => None,
            Dropout::Sample(rng) => {
                let keep = 1.0 - cfg.dropout;
                if cfg.dropout > 0.0 {
                    Some(Array2::from_shape_simple_fn(h.raw_dim(), || {
                        if rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    }))
                } else {
                    None
                }
            }
            Dropout::Fixed(m) => Some(m[l].clone()),
        };
        if let Some(m) = &mask {
            h *= m;
        }
        pre.push(z);
        outputs.push(h);
        masks.push(mask);
    }
    let xp = outputs.last().expect("at least one layer");
    let scores = input.adj.matvec(xp.dot(&params.score).view());
    let perm = top_k(scores.as_slice().expect("contiguous"), pool_size(cfg.pool_ratio, n));
    let mut pooled = xp.select(Axis(0), &perm);
    for (mut row, &i) in pooled.rows_mut().into_iter().zip(&perm) {
        row *= scores[i].tanh();
    }
    let embedding = readout(pooled.view(), cfg.readout)?;
    let argmax = match cfg.readout {
        Readout::Max => (0..pooled.ncols())
            .map(|d| {
                let col = pooled.column(d);
                let mut best = 0;
                for i in 1..col.len() {
                    if col[i] > col[best] {
                        best = i;
                    }
                }
                best
            })
            .collect(),
        _ => Vec::new(),
    };
    let probs = classify(embedding.view(), params.mlp_w.view(), params.mlp_b.view())?;
    if !probs.iter().all(|p| p.is_finite()) {
        return Err(GnnError::NonfiniteValue("class probabilities".into()));
    }
    Ok(ForwardCache { pre, outputs, masks, scores, perm, pooled, argmax, embedding, probs })
}

pub fn one_hot(label: Label) -> [f64; 2] {
    let mut y = [0.0; 2];
    y[label.class()] = 1.0;
    y
}

/// Loss of a single graph (no dropout).
pub fn loss(params: &ModelParams, input: &GraphInput, label: Label) -> Result<f64, GnnError> {
    let cache = forward(params, input, Dropout::Off)?;
    Ok(cross_entropy(one_hot(label), cache.probs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// (infected, free).
    pub probs: [f64; 2],
}

/// Deterministic inference.
pub fn predict(params: &ModelParams, input: &GraphInput) -> Result<Prediction, GnnError> {
    let cache = forward(params, input, Dropout::Off)?;
    Ok(Prediction { label: cache.label(), probs: cache.probs })
}
