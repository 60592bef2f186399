// SPDX-License-Identifier: Apache-2.0

//! Corpus handling, graph extraction, training orchestration and metrics.

pub mod corpus;
pub mod experiment;
pub mod ingest;
pub mod metrics;
pub mod synth;

use std::path::{Path, PathBuf};

pub use corpus::{families, loo_split, read_manifest, write_manifest, CorpusEntry};
pub use experiment::{
    load_corpus, run_experiment, run_on_corpus, train_on_manifest, ExperimentConfig, ExperimentReport, FoldReport,
    LabelledGraph,
};
pub use ingest::{extract_graph, ingest, ingest_entries, read_sources, write_graphs, IngestFailure, IngestReport};
pub use metrics::{evaluate, f_beta, metrics, Counts, EvalReport, Metrics};
pub use synth::{synthesize_corpus, Corpus, GeneratedDesign, FAMILIES};

use crate::gnn::GnnError;
use crate::graph::GraphError;
use crate::hdl::FrontendError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("manifest {0} not found")]
    ManifestMissing(PathBuf),
    #[error("{path}:{line}: {message}")]
    Manifest { path: PathBuf, line: u64, message: String },
    #[error("family `{0}` is not in the corpus")]
    UnknownFamily(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("design has no output signals")]
    NoOutputs,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gnn(#[from] GnnError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        PipelineError::Io { path: path.to_path_buf(), message: err.to_string() }
    }
}
