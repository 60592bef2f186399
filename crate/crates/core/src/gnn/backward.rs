// SPDX-License-Identifier: Apache-2.0

//! Reverse-mode gradients of the cross-entropy loss for one graph.
//!
//! The top-k selection and the max-readout winners are taken from the
//! forward cache and held fixed; gradient reaches the scoring weights
//! through the `tanh` gate only.

use ndarray::{Array1, Array2};

use crate::node::Label;

use super::layers::{cross_entropy, Readout, LOG_EPS};
use super::model::{one_hot, ForwardCache, GraphInput, ModelParams};
use super::GnnError;

/// Returns the gradient of `loss(label)` and the loss itself.
pub fn backward(
    params: &ModelParams,
    input: &GraphInput,
    cache: &ForwardCache,
    label: Label,
) -> Result<(ModelParams, f64), GnnError> {
    let y = one_hot(label);
    let p = cache.probs;
    let loss = cross_entropy(y, p);
    let mut grads = params.zeros_like();

    // softmax + clamped log
    let dp: [f64; 2] = std::array::from_fn(|i| if p[i] > LOG_EPS { -y[i] / p[i] } else { 0.0 });
    let dot = dp[0] * p[0] + dp[1] * p[1];
    let dlogits = Array1::from_iter((0..2).map(|j| p[j] * (dp[j] - dot)));

    // MLP
    let h = &cache.embedding;
    grads.mlp_w = Array2::from_shape_fn(params.mlp_w.raw_dim(), |(i, j)| h[i] * dlogits[j]);
    grads.mlp_b = dlogits.clone();
    let dh = params.mlp_w.dot(&dlogits);

    // readout
    let k = cache.pooled.nrows();
    let mut dpooled = Array2::<f64>::zeros(cache.pooled.raw_dim());
    match params.config.readout {
        Readout::Max => {
            for (d, &i) in cache.argmax.iter().enumerate() {
                dpooled[[i, d]] = dh[d];
            }
        }
        Readout::Mean => {
            let scaled = &dh / k as f64;
            for mut row in dpooled.rows_mut() {
                row.assign(&scaled);
            }
        }
        Readout::Sum => {
            for mut row in dpooled.rows_mut() {
                row.assign(&dh);
            }
        }
    }

    // tanh gating and selection
    let layers = params.gcn.len();
    let xp = &cache.outputs[layers - 1];
    let mut dxp = Array2::<f64>::zeros(xp.raw_dim());
    let mut dscores = Array1::<f64>::zeros(cache.scores.len());
    for (r, &i) in cache.perm.iter().enumerate() {
        let t = cache.scores[i].tanh();
        let g = dpooled.row(r);
        dxp.row_mut(i).scaled_add(t, &g);
        dscores[i] = g.dot(&xp.row(i)) * (1.0 - t * t);
    }

    // scores = A (xp w); A is symmetric
    let du = input.adj.matvec(dscores.view());
    grads.score = xp.t().dot(&du);
    for (mut row, &u) in dxp.rows_mut().into_iter().zip(du.iter()) {
        row.scaled_add(u, &params.score);
    }

    // GCN stack
    let mut dh_layer = dxp;
    for l in (0..layers).rev() {
        if let Some(mask) = &cache.masks[l] {
            dh_layer *= mask;
        }
        ndarray::Zip::from(&mut dh_layer).and(&cache.pre[l]).for_each(|g, &z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
        let dxw = input.adj.matmul(dh_layer.view());
        grads.gcn[l] = match l {
            0 => input.features.t_matmul(dxw.view()),
            _ => cache.outputs[l - 1].t().dot(&dxw),
        };
        if l > 0 {
            dh_layer = dxw.dot(&params.gcn[l].t());
        } else {
            break;
        }
    }

    for w in &mut grads.gcn {
        if !w.is_standard_layout() {
            *w = w.as_standard_layout().into_owned();
        }
    }
    if !grads.is_finite() {
        return Err(GnnError::NonfiniteGradient);
    }
    Ok((grads, loss))
}
