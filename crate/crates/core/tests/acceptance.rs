// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Full experiment reports go to `CARGO_TARGET_TMPDIR/acceptance`.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use htgnn_core::gnn::{Csr, GraphInput, ModelConfig, ModelParams, NodeFeatures, Readout, Sample};
use htgnn_core::graph::FeatureMatrix;
use htgnn_core::pipeline::{evaluate, f_beta, run_experiment, synthesize_corpus, ExperimentConfig, ExperimentReport};
use htgnn_core::{Dialect, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Corpus used by the end-to-end, ablation and determinism criteria.
const CORPUS_SEED: u64 = 1;
const PER_CLASS: usize = 25;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = run();
    let o = Outcome { name, pass, detail: format!("{detail} [{:.1} s]", start.elapsed().as_secs_f64()) };
    println!("{} {:<18} {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    o
}

fn gcn_oracle() -> (bool, String) {
    let start = Instant::now();
    let worst = common::gcn_oracle_worst(&mut ChaCha8Rng::seed_from_u64(101), 100, 50);
    let secs = start.elapsed().as_secs_f64();
    (
        worst < 1e-9 && secs < 10.0,
        format!("100 graphs <= 50 nodes: max abs diff {worst:.1e} (< 1e-9), {secs:.2} s (< 10 s)"),
    )
}

fn gradient_check() -> (bool, String) {
    let start = Instant::now();
    let s = common::finite_difference_check(&mut ChaCha8Rng::seed_from_u64(102), 25);
    let secs = start.elapsed().as_secs_f64();
    let pass = s.worst < 1e-4 && secs < 60.0 && s.checked > 0 && s.skipped * 20 < s.checked;
    (
        pass,
        format!(
            "25 trials, 6 nodes: worst rel err {:.1e} (< 1e-4) over {} coords, {} at a kink skipped, {secs:.2} s (< 60 s)",
            s.worst, s.checked, s.skipped
        ),
    )
}

fn pooling() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut errors = Vec::new();
    for i in 0..200 {
        let num = if i % 10 == 0 { 20 } else { rng.gen_range(1..=20) };
        if let Err(e) = common::pooling_case(&mut rng, num) {
            errors.push(e);
        }
    }
    let first = errors.first().cloned().unwrap_or_default();
    (errors.is_empty(), format!("200 (graph, pr) pairs, {} violations {first}", errors.len()))
}

fn goldens() -> (bool, String) {
    let fixtures = common::fixtures();
    let required = ["counter_trigger", "ternary", "gates", "part_select", "concat"];
    let stems: Vec<String> = fixtures.iter().map(|(v, _, _)| v.file_stem().unwrap().to_string_lossy().into()).collect();
    let missing: Vec<&str> = required.iter().copied().filter(|r| !stems.iter().any(|s| s == r)).collect();
    let mismatched: Vec<&str> = fixtures
        .iter()
        .zip(&stems)
        .filter(|((v, golden, d), _)| std::fs::read_to_string(golden).ok() != Some(common::render_dfgs(v, *d)))
        .map(|(_, s)| s.as_str())
        .collect();
    (
        fixtures.len() >= 15 && missing.is_empty() && mismatched.is_empty(),
        format!("{} fixtures, mismatched {mismatched:?}, missing required {missing:?}", fixtures.len()),
    )
}

fn optimize_semantics() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut errors = Vec::new();
    for _ in 0..100 {
        let max = rng.gen_range(8..=200);
        if let Err(e) = common::optimize_case(&common::random_netlist(&mut rng, max)) {
            errors.push(e);
        }
    }
    let first = errors.first().cloned().unwrap_or_default();
    (errors.is_empty(), format!("100 graphs <= 200 nodes, {} violations {first}", errors.len()))
}

fn metric_identities() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let cfg = ModelConfig {
            dialect: Dialect::Rtl,
            input_dim: 5,
            hidden: vec![4],
            pool_ratio: 0.5,
            readout: Readout::Sum,
            dropout: 0.0,
        };
        let model = ModelParams::init(cfg, trial).unwrap();
        let test: Vec<(String, Sample)> = (0..rng.gen_range(1..40))
            .map(|i| {
                let n = rng.gen_range(1..8);
                let edges = common::random_edges(&mut rng, n, 2);
                let hot = (0..n).map(|_| rng.gen_range(0..5)).collect();
                let label = if rng.gen_bool(0.5) { Label::Infected } else { Label::Free };
                let input =
                    GraphInput::new(Csr::normalized(n, &edges), NodeFeatures::OneHot(FeatureMatrix { dim: 5, hot }));
                (format!("g{i}"), Sample { input, label })
            })
            .collect();
        let beta = [0.5, 1.0, 2.0][trial as usize % 3];
        let r = evaluate(&model, &test, beta).unwrap();
        let c = r.counts;
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let (p, rc) = (ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn_));
        let b2 = beta * beta;
        let f = if p + rc == 0.0 { 0.0 } else { (1.0 + b2) * p * rc / (b2 * p + rc) };
        for d in [r.metrics.precision - p, r.metrics.recall - rc, r.metrics.f_beta - f] {
            worst = worst.max(d.abs());
        }
    }
    let headline = f_beta(0.92, 0.97, 1.0, &mut false);
    (
        worst < 1e-12 && (headline - 0.944).abs() < 5e-4,
        format!("100 evaluations: max deviation {worst:.1e} (< 1e-12); P=0.92 R=0.97 -> F1 {headline:.4} (~0.944)"),
    )
}

fn run(cfg: &ExperimentConfig, out: &Path, name: &str) -> ExperimentReport {
    let report = run_experiment(cfg, &mut |f| {
        eprintln!(
            "  {name} {:<7} r{} P={:.2} R={:.2} F1={:.2} loss={:.4}",
            f.family, f.repeat, f.metrics.precision, f.metrics.recall, f.metrics.f_beta, f.final_train_loss
        )
    })
    .unwrap();
    std::fs::write(out.join(format!("{name}.json")), report.to_json()).unwrap();
    report
}

fn main() -> ExitCode {
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = std::fs::remove_dir_all(&out);
    let corpus_dir = out.join("corpus");
    synthesize_corpus(CORPUS_SEED, PER_CLASS, PER_CLASS).write(&corpus_dir).unwrap();

    let mut outcomes = vec![
        check("gcn-oracle", gcn_oracle),
        check("gradient-check", gradient_check),
        check("pooling-contract", pooling),
        check("frontend-goldens", goldens),
        check("graph-transforms", optimize_semantics),
    ];

    let mut netlist_default = None;
    outcomes.push(check("end-to-end", || {
        let start = Instant::now();
        let rtl = run(&ExperimentConfig::defaults(Dialect::Rtl, corpus_dir.join("rtl.tsv")), &out, "rtl");
        let net = run(&ExperimentConfig::defaults(Dialect::Netlist, corpus_dir.join("netlist.tsv")), &out, "netlist");
        let minutes = start.elapsed().as_secs_f64() / 60.0;
        let (r, n) = (rtl.aggregate.unwrap(), net.aggregate.unwrap());
        let families = rtl.folds.iter().map(|f| f.family.as_str()).collect::<std::collections::BTreeSet<_>>().len();
        let pass = families >= 4
            && rtl.corpus_size >= 40
            && r.mean_recall >= 0.90
            && r.mean_f_beta >= 0.85
            && n.mean_recall >= 0.75
            && minutes < 30.0;
        netlist_default = Some(n.mean_f_beta);
        (
            pass,
            format!(
                "{} designs, {families} families, {} repeats: RTL recall {:.3} (>= 0.90) F1 {:.3} (>= 0.85); netlist recall {:.3} (>= 0.75); {minutes:.1} min (< 30)",
                rtl.corpus_size, rtl.repeats, r.mean_recall, r.mean_f_beta, n.mean_recall
            ),
        )
    }));

    outcomes.push(check("pooling-ablation", || {
        let mut cfg = ExperimentConfig::defaults(Dialect::Netlist, corpus_dir.join("netlist.tsv"));
        let pooled = netlist_default.unwrap_or_else(|| run(&cfg, &out, "netlist").aggregate.unwrap().mean_f_beta);
        cfg.model.pool_ratio = 1.0;
        let unpooled = run(&cfg, &out, "netlist_pr1").aggregate.unwrap().mean_f_beta;
        (
            unpooled < pooled,
            format!("netlist mean F1: pr=1.0 {unpooled:.3} vs pr=0.6 {pooled:.3} (must be strictly lower)"),
        )
    }));

    outcomes.push(check("metric-identities", metric_identities));

    outcomes.push(check("determinism", || {
        let mut cfg = ExperimentConfig::defaults(Dialect::Rtl, corpus_dir.join("rtl.tsv"));
        cfg.repeats = 1;
        cfg.train.epochs = 10;
        let a = run_experiment(&cfg, &mut |_| {}).unwrap().to_json();
        let b = run_experiment(&cfg, &mut |_| {}).unwrap().to_json();
        let same = common::without_timing(&a) == common::without_timing(&b);
        (
            same,
            format!(
                "two eval runs (RTL, 10 epochs, 1 repeat): reports {} apart from timing",
                if same { "identical" } else { "differ" }
            ),
        )
    }));

    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    println!(
        "acceptance: {}/{} criteria passed; reports in {}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        out.display()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
