// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::node::Label;

use super::backward::backward;
use super::model::{forward, Dropout, GraphInput, ModelParams};
use super::GnnError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub dropout_rate: f64,
}

impl TrainConfig {
    pub fn rtl_default() -> Self {
        TrainConfig { epochs: 200, batch_size: 4, learning_rate: 0.001, seed: 0, dropout_rate: 0.5 }
    }

    pub fn netlist_default() -> Self {
        TrainConfig { batch_size: 2, ..Self::rtl_default() }
    }

    pub fn validate(&self) -> Result<(), GnnError> {
        if self.epochs == 0 || self.batch_size == 0 || self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(GnnError::InvalidConfig(format!(
                "need epochs > 0, batch_size >= 1 and a finite non-negative learning rate, got {self:?}"
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(GnnError::InvalidConfig(format!("dropout {} not in [0, 1)", self.dropout_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub input: GraphInput,
    pub label: Label,
}

/// Mini-batch SGD without momentum on the mean batch loss.
///
/// Returns the trained parameters and the mean training loss of every epoch
/// (measured with dropout active, as seen by the optimizer).
pub fn train(model: &ModelParams, data: &[Sample], cfg: &TrainConfig) -> Result<(ModelParams, Vec<f64>), GnnError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut params = model.clone();
    params.config.dropout = cfg.dropout_rate;
    params.config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut acc = params.zeros_like();
            // fixed accumulation order keeps runs bitwise reproducible
            for &i in batch {
                let s = &data[i];
                let cache = forward(&params, &s.input, Dropout::Sample(&mut rng))?;
                let (g, loss) = backward(&params, &s.input, &cache, s.label)?;
                acc.add_scaled(1.0, &g);
                epoch_loss += loss;
            }
            params.add_scaled(-cfg.learning_rate / batch.len() as f64, &acc);
            if !params.is_finite() {
                return Err(GnnError::NonfiniteGradient);
            }
        }
        history.push(epoch_loss / data.len() as f64);
    }
    Ok((params, history))
}

/// `epoch,mean_loss` lines with a header.
pub fn loss_history_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    for (e, l) in history.iter().enumerate() {
        out.push_str(&format!("{},{l}\n", e + 1));
    }
    out
}
