// SPDX-License-Identifier: Apache-2.0

//! Graph classifier: GCN layers, attention pooling, readout and an MLP head,
//! with hand-written gradients and SGD training.

pub mod backward;
pub mod checkpoint;
pub mod layers;
pub mod model;
pub mod sparse;
pub mod train;

pub use backward::backward;
pub use checkpoint::{load_model, save_model};
pub use layers::{classify, cross_entropy, gcn_forward, pool_size, readout, sag_pool, softmax, top_k, Pooled, Readout};
pub use model::{
    forward, loss, one_hot, predict, Dropout, ForwardCache, GraphInput, ModelConfig, ModelParams, NodeFeatures,
    Prediction,
};
pub use sparse::Csr;
pub use train::{loss_history_csv, train, Sample, TrainConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GnnError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonfiniteValue(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("gradient or parameter became non-finite")]
    NonfiniteGradient,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model vocabulary version {found} does not match {expected}")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
}
