// SPDX-License-Identifier: Apache-2.0

//! Stateless building blocks of the classifier.

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::sparse::Csr;
use super::GnnError;

/// Probabilities are clamped here before taking logs.
pub const LOG_EPS: f64 = 1e-12;

fn check_finite<'a>(what: &str, mut values: impl Iterator<Item = &'a f64>) -> Result<(), GnnError> {
    if values.all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GnnError::NonfiniteValue(what.to_string()))
    }
}

/// `ReLU(A_norm X W)`.
pub fn gcn_forward(x: ArrayView2<f64>, adj: &Csr, w: ArrayView2<f64>) -> Result<Array2<f64>, GnnError> {
    if x.nrows() != adj.n || x.ncols() != w.nrows() {
        return Err(GnnError::DimensionMismatch(format!(
            "X is {}x{}, A is {}x{}, W is {}x{}",
            x.nrows(),
            x.ncols(),
            adj.n,
            adj.n,
            w.nrows(),
            w.ncols()
        )));
    }
    check_finite("gcn input", x.iter().chain(w.iter()))?;
    let mut z = adj.matmul(x.dot(&w).view());
    z.mapv_inplace(|v| v.max(0.0));
    Ok(z)
}

/// Nodes kept by pooling: `ceil(pr * n)`, at least one.
pub fn pool_size(pr: f64, n: usize) -> usize {
    // tolerance absorbs representation error such as 0.55 * 100 = 55.00000000000001
    let k = (pr * n as f64 - 1e-9).ceil().max(1.0) as usize;
    k.min(n.max(1))
}

/// Indices of the `k` largest scores, ties to the lower index, returned in
/// ascending index order.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub x: Array2<f64>,
    pub adj: Csr,
    /// Kept node indices, ascending.
    pub perm: Vec<usize>,
    /// Attention scores for every input node.
    pub scores: Array1<f64>,
}

/// Attention scores `A_norm X w`.
pub fn attention_scores(x: ArrayView2<f64>, adj: &Csr, w: ArrayView1<f64>) -> Array1<f64> {
    adj.matvec(x.dot(&w).view())
}

/// Top-k attention pooling: keep the best-scoring nodes, gate their
/// embeddings by `tanh(score)` and restrict the adjacency to them.
pub fn sag_pool(x: ArrayView2<f64>, adj: &Csr, score_w: ArrayView1<f64>, pr: f64) -> Result<Pooled, GnnError> {
    if x.nrows() == 0 {
        return Err(GnnError::EmptyGraph);
    }
    if x.nrows() != adj.n || x.ncols() != score_w.len() {
        return Err(GnnError::DimensionMismatch(format!(
            "X is {}x{}, A is {}x{}, score weights have {}",
            x.nrows(),
            x.ncols(),
            adj.n,
            adj.n,
            score_w.len()
        )));
    }
    let scores = attention_scores(x, adj, score_w);
    let perm = top_k(scores.as_slice().expect("contiguous"), pool_size(pr, x.nrows()));
    let mut pooled = x.select(Axis(0), &perm);
    for (mut row, &i) in pooled.rows_mut().into_iter().zip(&perm) {
        row *= scores[i].tanh();
    }
    Ok(Pooled { x: pooled, adj: adj.induced(&perm), perm, scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    #[default]
    Max,
    Mean,
    Sum,
}

impl Readout {
    pub fn as_byte(self) -> u8 {
        match self {
            Readout::Max => 0,
            Readout::Mean => 1,
            Readout::Sum => 2,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        [Readout::Max, Readout::Mean, Readout::Sum].get(b as usize).copied()
    }
}

impl std::str::FromStr for Readout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max" => Ok(Readout::Max),
            "mean" => Ok(Readout::Mean),
            "sum" => Ok(Readout::Sum),
            other => Err(format!("unknown readout `{other}` (expected max, mean or sum)")),
        }
    }
}

/// Graph embedding by column-wise max, mean or sum.
pub fn readout(x: ArrayView2<f64>, mode: Readout) -> Result<Array1<f64>, GnnError> {
    if x.nrows() == 0 {
        return Err(GnnError::EmptyGraph);
    }
    Ok(match mode {
        Readout::Max => x.fold_axis(Axis(0), f64::NEG_INFINITY, |&a, &b| a.max(b)),
        Readout::Mean => x.mean_axis(Axis(0)).expect("non-empty"),
        Readout::Sum => x.sum_axis(Axis(0)),
    })
}

pub fn softmax(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e = [(logits[0] - m).exp(), (logits[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

/// `softmax(h W + b)`.
pub fn classify(h: ArrayView1<f64>, w: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<[f64; 2], GnnError> {
    if w.nrows() != h.len() || w.ncols() != 2 || b.len() != 2 {
        return Err(GnnError::DimensionMismatch(format!(
            "embedding has {} entries, MLP is {}x{} with {} biases",
            h.len(),
            w.nrows(),
            w.ncols(),
            b.len()
        )));
    }
    let z = h.dot(&w) + b;
    Ok(softmax([z[0], z[1]]))
}

/// `-sum y_i ln(max(yhat_i, eps))`.
pub fn cross_entropy(y: [f64; 2], yhat: [f64; 2]) -> f64 {
    -(y[0] * yhat[0].max(LOG_EPS).ln() + y[1] * yhat[1].max(LOG_EPS).ln())
}
