// SPDX-License-Identifier: Apache-2.0

mod common;

use htgnn_core::gnn::{Csr, GraphInput, ModelConfig, ModelParams, NodeFeatures, Readout, Sample};
use htgnn_core::graph::FeatureMatrix;
use htgnn_core::pipeline::{
    evaluate, f_beta, ingest, load_corpus, metrics, read_manifest, run_experiment, synthesize_corpus, write_graphs,
    Counts, ExperimentConfig, PipelineError,
};
use htgnn_core::{Dialect, Label, Op};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(dialect: Dialect, manifest: std::path::PathBuf) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(dialect, manifest);
    cfg.repeats = 1;
    cfg.train.epochs = 3;
    cfg.model.hidden = vec![16; cfg.model.hidden.len()];
    cfg
}

#[test]
fn synthetic_corpus_ingests_in_both_dialects() {
    let dir = tempfile::tempdir().unwrap();
    synthesize_corpus(4, 10, 10).write(dir.path()).unwrap();
    for dialect in [Dialect::Rtl, Dialect::Netlist] {
        let report = ingest(&dir.path().join(format!("{dialect}.tsv")), dialect).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert_eq!(report.graphs.len(), 20);
        for (entry, g) in &report.graphs {
            assert!(g.validate().is_ok() && !g.roots.is_empty(), "{}", entry.id);
            assert!(g.nodes.iter().all(|n| n.tag.is_some()));
            if dialect == Dialect::Netlist {
                assert!(!g.nodes.iter().any(|n| matches!(n.op, Some(Op::Concat | Op::PartSelect))));
            }
        }
    }
}

#[test]
fn serialized_graph_manifest_matches_sources() {
    let dir = tempfile::tempdir().unwrap();
    synthesize_corpus(5, 5, 5).write(dir.path()).unwrap();
    let report = ingest(&dir.path().join("rtl.tsv"), Dialect::Rtl).unwrap();
    let out = dir.path().join("graphs");
    write_graphs(&report, &out).unwrap();
    let entries = read_manifest(&out.join("graphs.tsv"), Dialect::Rtl).unwrap();
    assert!(entries.iter().all(|e| e.path.extension().unwrap() == "htg"));
    let (from_sources, _) = load_corpus(&dir.path().join("rtl.tsv"), Dialect::Rtl).unwrap();
    let (from_graphs, failures) = load_corpus(&out.join("graphs.tsv"), Dialect::Rtl).unwrap();
    assert!(failures.is_empty());
    for (a, b) in from_sources.iter().zip(&from_graphs) {
        assert_eq!(a.entry.id, b.entry.id);
        assert_eq!(a.sample.input, b.sample.input);
    }
    // the wrong dialect is reported per entry, not fatal
    let (none, failures) = load_corpus(&out.join("graphs.tsv"), Dialect::Netlist).unwrap();
    assert!(none.is_empty() && failures.len() == 10);
}

#[test]
fn experiment_reports_every_fold_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    synthesize_corpus(6, 10, 10).write(dir.path()).unwrap();
    let cfg = small(Dialect::Rtl, dir.path().join("rtl.tsv"));
    let mut seen = Vec::new();
    let a = run_experiment(&cfg, &mut |f| seen.push(f.family.clone())).unwrap();
    assert_eq!(seen, ["timer", "fsm", "cipher", "serial", "accum"]);
    assert_eq!(a.folds.iter().map(|f| f.test_size).sum::<usize>(), 20);
    assert!(a.folds.iter().all(|f| f.train_size + f.test_size == 20));
    let b = run_experiment(&cfg, &mut |_| {}).unwrap();
    assert_eq!(common::without_timing(&a.to_json()), common::without_timing(&b.to_json()));

    let mut other = cfg.clone();
    other.seed = 1;
    let c = run_experiment(&other, &mut |_| {}).unwrap();
    assert_ne!(common::without_timing(&a.to_json()), common::without_timing(&c.to_json()));

    let mut one = cfg.clone();
    one.families = Some(vec!["cipher".into()]);
    assert_eq!(run_experiment(&one, &mut |_| {}).unwrap().folds.len(), 1);
    one.families = Some(vec!["gpu".into()]);
    assert_eq!(run_experiment(&one, &mut |_| {}).unwrap_err(), PipelineError::UnknownFamily("gpu".into()));
}

#[test]
fn missing_manifest_is_reported() {
    let cfg = small(Dialect::Rtl, "/nonexistent/rtl.tsv".into());
    assert!(matches!(run_experiment(&cfg, &mut |_| {}), Err(PipelineError::ManifestMissing(_))));
}

fn random_samples(rng: &mut impl Rng, count: usize) -> Vec<(String, Sample)> {
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..10);
            let edges = common::random_edges(rng, n, 2);
            let hot = (0..n).map(|_| rng.gen_range(0..5)).collect();
            let label = if rng.gen_bool(0.5) { Label::Infected } else { Label::Free };
            let input =
                GraphInput::new(Csr::normalized(n, &edges), NodeFeatures::OneHot(FeatureMatrix { dim: 5, hot }));
            (format!("g{i}"), Sample { input, label })
        })
        .collect()
}

proptest! {
    #[test]
    fn evaluate_metrics_follow_from_counts(seed in any::<u64>(), count in 1usize..30, beta in 0.25f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = ModelConfig { dialect: Dialect::Rtl, input_dim: 5, hidden: vec![4], pool_ratio: 0.5, readout: Readout::Sum, dropout: 0.0 };
        let model = ModelParams::init(cfg, seed).unwrap();
        let test = random_samples(&mut rng, count);
        let r = evaluate(&model, &test, beta).unwrap();
        let c = r.counts;
        prop_assert_eq!(c.total(), count);
        let (tp, fp, fn_) = (c.tp as f64, c.fp as f64, c.fn_ as f64);
        let p = if c.tp + c.fp == 0 { 0.0 } else { tp / (tp + fp) };
        let rc = if c.tp + c.fn_ == 0 { 0.0 } else { tp / (tp + fn_) };
        let b2 = beta * beta;
        let f = if p + rc == 0.0 { 0.0 } else { (1.0 + b2) * p * rc / (b2 * p + rc) };
        prop_assert!((r.metrics.precision - p).abs() < 1e-12);
        prop_assert!((r.metrics.recall - rc).abs() < 1e-12);
        prop_assert!((r.metrics.f_beta - f).abs() < 1e-12);
        for (rec, (id, s)) in r.predictions.iter().zip(&test) {
            prop_assert_eq!(&rec.id, id);
            prop_assert_eq!(rec.truth, s.label);
        }
    }

    #[test]
    fn f1_is_between_precision_and_recall(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
        let m = metrics(Counts { tp, fp, fn_, tn: 0 }, 1.0);
        let (lo, hi) = (m.precision.min(m.recall), m.precision.max(m.recall));
        prop_assert!(m.f_beta >= lo - 1e-15 && m.f_beta <= hi + 1e-15);
    }
}

#[test]
fn headline_f1_arithmetic() {
    let mut flag = false;
    let f = f_beta(0.92, 0.97, 1.0, &mut flag);
    assert!((f - 0.944).abs() < 5e-4 && !flag, "{f}");
    assert_eq!(
        evaluate(&ModelParams::init(ModelConfig::rtl_default(), 0).unwrap(), &[], 1.0),
        Err(PipelineError::EmptyTestSet)
    );
}
