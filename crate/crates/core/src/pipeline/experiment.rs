// SPDX-License-Identifier: Apache-2.0

//! Configuration files and the leave-one-family-out experiment driver.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::gnn::{train, GraphInput, ModelConfig, ModelParams, Readout, Sample, TrainConfig};
use crate::graph::encode_features;
use crate::node::{Dialect, Label};

use super::corpus::{families, loo_split, read_manifest, CorpusEntry};
use super::ingest::{ingest_entries, IngestFailure};
use super::metrics::{evaluate, Counts, EvalReport, Metrics};
use super::PipelineError;

/// Keys accepted in a config file. Unset keys take the dialect defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dialect: String,
    manifest: PathBuf,
    repeats: Option<usize>,
    seed: Option<u64>,
    beta: Option<f64>,
    families: Option<Vec<String>>,
    layers: Option<usize>,
    hidden_units: Option<usize>,
    pool_ratio: Option<f64>,
    readout: Option<String>,
    dropout: Option<f64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dialect: Dialect,
    pub manifest: PathBuf,
    pub repeats: usize,
    pub seed: u64,
    pub beta: f64,
    /// Held-out families to evaluate; all families when `None`.
    pub families: Option<Vec<String>>,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn defaults(dialect: Dialect, manifest: impl Into<PathBuf>) -> Self {
        let model = ModelConfig::for_dialect(dialect);
        let train = match dialect {
            Dialect::Rtl => TrainConfig::rtl_default(),
            Dialect::Netlist => TrainConfig::netlist_default(),
        };
        ExperimentConfig {
            dialect,
            manifest: manifest.into(),
            repeats: 5,
            seed: 0,
            beta: 1.0,
            families: None,
            model,
            train,
        }
    }

    /// Parses TOML; a relative `manifest` is resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        let dialect: Dialect = raw.dialect.parse().map_err(PipelineError::Config)?;
        let mut cfg = Self::defaults(dialect, base_dir.join(&raw.manifest));
        if let Some(v) = raw.repeats {
            cfg.repeats = v;
        }
        if let Some(v) = raw.seed {
            cfg.seed = v;
        }
        if let Some(v) = raw.beta {
            cfg.beta = v;
        }
        cfg.families = raw.families;
        let width = raw.hidden_units.unwrap_or(cfg.model.embedding_dim());
        let depth = raw.layers.unwrap_or(cfg.model.hidden.len());
        cfg.model.hidden = vec![width; depth];
        if let Some(v) = raw.pool_ratio {
            cfg.model.pool_ratio = v;
        }
        if let Some(v) = raw.readout {
            cfg.model.readout = v.parse::<Readout>().map_err(PipelineError::Config)?;
        }
        if let Some(v) = raw.dropout {
            cfg.model.dropout = v;
            cfg.train.dropout_rate = v;
        }
        if let Some(v) = raw.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = raw.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = raw.learning_rate {
            cfg.train.learning_rate = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new("")))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.repeats == 0 {
            return Err(PipelineError::Config("repeats must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(PipelineError::Config(format!("beta must be positive, got {}", self.beta)));
        }
        self.model.validate()?;
        self.train.validate()?;
        Ok(())
    }
}

/// Seeds for one training run, decorrelated across repeats and folds.
pub fn run_seed(seed: u64, repeat: usize, fold: usize) -> u64 {
    let mut z = seed ^ ((repeat as u64) << 32 | fold as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct LabelledGraph {
    pub entry: CorpusEntry,
    pub sample: Sample,
}

impl AsRef<CorpusEntry> for LabelledGraph {
    fn as_ref(&self) -> &CorpusEntry {
        &self.entry
    }
}

/// Ingests a manifest into network inputs, collecting per-entry failures.
pub fn load_corpus(
    manifest: &Path,
    dialect: Dialect,
) -> Result<(Vec<LabelledGraph>, Vec<IngestFailure>), PipelineError> {
    let entries = read_manifest(manifest, dialect)?;
    let mut report = ingest_entries(&entries);
    let mut out = Vec::with_capacity(report.graphs.len());
    for (entry, g) in report.graphs {
        match encode_features(&g) {
            Ok(f) => out.push(LabelledGraph {
                sample: Sample { input: GraphInput::from_parts(&g, f), label: entry.label },
                entry,
            }),
            Err(e) => report.failures.push(IngestFailure { id: entry.id.clone(), message: e.to_string() }),
        }
    }
    Ok((out, report.failures))
}

/// Trains one model from `cfg` on `data`.
pub fn fit(cfg: &ExperimentConfig, data: &[Sample], seed: u64) -> Result<(ModelParams, Vec<f64>), PipelineError> {
    let init = ModelParams::init(cfg.model.clone(), seed)?;
    let tc = TrainConfig { seed: seed.wrapping_add(1), ..cfg.train.clone() };
    Ok(train(&init, data, &tc)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldTiming {
    pub train_seconds: f64,
    pub detect_ms_per_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub family: String,
    pub repeat: usize,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub final_train_loss: f64,
    pub counts: Counts,
    pub metrics: Metrics,
    pub predictions: Vec<super::metrics::PredictionRecord>,
    pub timing: FoldTiming,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub folds: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f_beta: f64,
    /// Metrics of the summed confusion counts.
    pub pooled: Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunTiming {
    pub total_seconds: f64,
    pub mean_detect_ms_per_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub layers: usize,
    pub hidden_units: usize,
    pub input_dim: usize,
    pub pool_ratio: f64,
    pub readout: Readout,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl ModelSummary {
    fn of(cfg: &ExperimentConfig) -> Self {
        ModelSummary {
            layers: cfg.model.hidden.len(),
            hidden_units: cfg.model.embedding_dim(),
            input_dim: cfg.model.input_dim,
            pool_ratio: cfg.model.pool_ratio,
            readout: cfg.model.readout,
            dropout: cfg.train.dropout_rate,
            epochs: cfg.train.epochs,
            batch_size: cfg.train.batch_size,
            learning_rate: cfg.train.learning_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestFailureRecord {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub dialect: Dialect,
    pub repeats: usize,
    pub seed: u64,
    pub beta: f64,
    pub model: ModelSummary,
    pub corpus_size: usize,
    pub ingest_failures: Vec<IngestFailureRecord>,
    pub folds: Vec<FoldReport>,
    pub aggregate: Option<Aggregate>,
    pub timing: RunTiming,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Mean fold metrics plus metrics of the pooled counts.
pub fn aggregate(folds: &[FoldReport], beta: f64) -> Option<Aggregate> {
    if folds.is_empty() {
        return None;
    }
    let n = folds.len() as f64;
    let mean = |f: fn(&Metrics) -> f64| folds.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    let mut pooled = Counts::default();
    for r in folds {
        pooled.tp += r.counts.tp;
        pooled.fn_ += r.counts.fn_;
        pooled.fp += r.counts.fp;
        pooled.tn += r.counts.tn;
    }
    Some(Aggregate {
        folds: folds.len(),
        mean_precision: mean(|m| m.precision),
        mean_recall: mean(|m| m.recall),
        mean_f_beta: mean(|m| m.f_beta),
        pooled: super::metrics::metrics(pooled, beta),
    })
}

/// Leave-one-family-out over `corpus`, `repeats` times. `on_fold` sees every
/// finished fold, so callers can persist partial results.
pub fn run_on_corpus(
    cfg: &ExperimentConfig,
    corpus: &[LabelledGraph],
    failures: &[IngestFailure],
    on_fold: &mut dyn FnMut(&FoldReport),
) -> Result<ExperimentReport, PipelineError> {
    cfg.validate()?;
    let start = Instant::now();
    let all: Vec<CorpusEntry> = corpus.iter().map(|g| g.entry.clone()).collect();
    let held_out = match &cfg.families {
        Some(f) => f.clone(),
        None => families(&all),
    };
    let mut folds = Vec::new();
    for repeat in 0..cfg.repeats {
        for (fi, family) in held_out.iter().enumerate() {
            let (train_set, test_set) = loo_split(corpus, family)?;
            if train_set.is_empty() {
                return Err(PipelineError::Config(format!("holding out `{family}` leaves nothing to train on")));
            }
            let seed = run_seed(cfg.seed, repeat, fi);
            let samples: Vec<Sample> = train_set.iter().map(|g| g.sample.clone()).collect();
            let t0 = Instant::now();
            let (model, history) = fit(cfg, &samples, seed)?;
            let train_seconds = t0.elapsed().as_secs_f64();
            let test: Vec<(String, Sample)> = test_set.iter().map(|g| (g.entry.id.clone(), g.sample.clone())).collect();
            let EvalReport { counts, metrics, predictions, timing } = evaluate(&model, &test, cfg.beta)?;
            let fold = FoldReport {
                family: family.clone(),
                repeat,
                seed,
                train_size: samples.len(),
                test_size: test.len(),
                final_train_loss: history.last().copied().unwrap_or(f64::NAN),
                counts,
                metrics,
                predictions,
                timing: FoldTiming { train_seconds, detect_ms_per_sample: timing.detect_ms_per_sample },
            };
            on_fold(&fold);
            folds.push(fold);
        }
    }
    let detect = if folds.is_empty() {
        0.0
    } else {
        folds.iter().map(|f| f.timing.detect_ms_per_sample).sum::<f64>() / folds.len() as f64
    };
    Ok(ExperimentReport {
        dialect: cfg.dialect,
        repeats: cfg.repeats,
        seed: cfg.seed,
        beta: cfg.beta,
        model: ModelSummary::of(cfg),
        corpus_size: corpus.len(),
        ingest_failures: failures
            .iter()
            .map(|f| IngestFailureRecord { id: f.id.clone(), message: f.message.clone() })
            .collect(),
        aggregate: aggregate(&folds, cfg.beta),
        folds,
        timing: RunTiming { total_seconds: start.elapsed().as_secs_f64(), mean_detect_ms_per_sample: detect },
    })
}

/// Ingests the configured manifest and runs the experiment.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    on_fold: &mut dyn FnMut(&FoldReport),
) -> Result<ExperimentReport, PipelineError> {
    cfg.validate()?;
    let (corpus, failures) = load_corpus(&cfg.manifest, cfg.dialect)?;
    run_on_corpus(cfg, &corpus, &failures, on_fold)
}

/// Trains on every entry of the configured manifest.
pub fn train_on_manifest(cfg: &ExperimentConfig) -> Result<(ModelParams, Vec<f64>, Vec<IngestFailure>), PipelineError> {
    cfg.validate()?;
    let (corpus, failures) = load_corpus(&cfg.manifest, cfg.dialect)?;
    let samples: Vec<Sample> = corpus.into_iter().map(|g| g.sample).collect();
    if samples.is_empty() {
        return Err(PipelineError::Gnn(crate::gnn::GnnError::EmptyDataset));
    }
    let (model, history) = fit(cfg, &samples, run_seed(cfg.seed, 0, 0))?;
    Ok((model, history, failures))
}

/// Count of each label, for reporting balance.
pub fn label_counts(corpus: &[LabelledGraph]) -> (usize, usize) {
    let inf = corpus.iter().filter(|g| g.sample.label == Label::Infected).count();
    (inf, corpus.len() - inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "dialect = \"netlist\"\nmanifest = \"c/netlist.tsv\"\nrepeats = 2\npool_ratio = 1.0\nhidden_units = 16\n",
            Path::new("/tmp/x"),
        )
        .unwrap();
        assert_eq!(cfg.manifest, Path::new("/tmp/x/c/netlist.tsv"));
        assert_eq!(cfg.model.hidden, [16, 16, 16]);
        assert_eq!(cfg.model.pool_ratio, 1.0);
        assert_eq!(cfg.train, TrainConfig::netlist_default());
        assert_eq!(cfg.repeats, 2);
    }

    #[test]
    fn toml_rejects_unknown_and_invalid() {
        let base = Path::new(".");
        assert!(matches!(
            ExperimentConfig::from_toml("dialect = \"rtl\"\nmanifest = \"m\"\nlr = 1\n", base),
            Err(PipelineError::Config(_))
        ));
        assert!(ExperimentConfig::from_toml("dialect = \"rtl\"\nmanifest = \"m\"\npool_ratio = 0\n", base).is_err());
        assert!(ExperimentConfig::from_toml("dialect = \"vhdl\"\nmanifest = \"m\"\n", base).is_err());
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(run_seed(0, 0, 0), run_seed(0, 0, 1));
        assert_ne!(run_seed(0, 1, 0), run_seed(0, 0, 1));
        assert_eq!(run_seed(5, 2, 3), run_seed(5, 2, 3));
    }
}
