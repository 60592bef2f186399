// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use htgnn_core::gnn::{save_model, ModelConfig, ModelParams};
use htgnn_core::Dialect;

fn htgnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_htgnn")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stripped(path: &Path) -> serde_json::Value {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("timing");
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    strip(&mut v);
    v
}

/// A model whose only nonzero weight is the output bias.
fn constant_model(dir: &Path, infected: bool) -> std::path::PathBuf {
    let mut p = ModelParams::init(ModelConfig::for_dialect(Dialect::Rtl), 0).unwrap();
    p = p.zeros_like();
    p.mlp_b[if infected { 0 } else { 1 }] = 5.0;
    let path = dir.join(if infected { "inf.htm" } else { "free.htm" });
    std::fs::write(&path, save_model(&p)).unwrap();
    path
}

#[test]
fn corpus_to_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = d.join("corpus");
    let out = htgnn(&["synth-corpus", "--seed", "3", "--free", "5", "--infected", "5", "--out", s(&corpus)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let graphs = d.join("graphs");
    let out =
        htgnn(&["extract", "--dialect", "netlist", "--manifest", s(&corpus.join("netlist.tsv")), "--out", s(&graphs)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(&graphs).unwrap().count(), 11);

    let cfg = d.join("exp.toml");
    std::fs::write(
        &cfg,
        "dialect = \"rtl\"\nmanifest = \"corpus/rtl.tsv\"\nrepeats = 1\nepochs = 2\nhidden_units = 8\n",
    )
    .unwrap();
    let model = d.join("model.htm");
    let history = d.join("loss.csv");
    let out = htgnn(&["train", "--config", s(&cfg), "--out", s(&model), "--history", s(&history)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&history).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("epoch,mean_loss\n1,"));

    let design = corpus.join("rtl/cipher_00_inf.v");
    let out = htgnn(&["detect", "--model", s(&model), s(&design)]);
    let code = out.status.code().unwrap();
    let verdict: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let infected = verdict["verdict"] == "infected";
    assert_eq!(code, if infected { 2 } else { 0 });
    assert!(verdict["p_infected"].as_f64().unwrap() >= 0.0);

    let (r1, r2) = (d.join("r1.json"), d.join("r2.json"));
    for r in [&r1, &r2] {
        let out = htgnn(&["eval", "--config", s(&cfg), "--report", s(r)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let report = stripped(&r1);
    assert_eq!(report["folds"].as_array().unwrap().len(), 5);
    assert!(report.get("partial").is_none());
    assert_eq!(report, stripped(&r2));
}

#[test]
fn detect_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("d.v");
    std::fs::write(
        &design,
        "module d(input clk, input [3:0] a, output reg [3:0] q);\nalways @(posedge clk) q <= q + a;\nendmodule\n",
    )
    .unwrap();
    let run = |model: &Path| htgnn(&["detect", "--model", s(model), s(&design)]);
    assert_eq!(run(&constant_model(dir.path(), true)).status.code(), Some(2));
    assert_eq!(run(&constant_model(dir.path(), false)).status.code(), Some(0));
    assert_eq!(run(&dir.path().join("missing.htm")).status.code(), Some(1));
    let corrupt = dir.path().join("corrupt.htm");
    std::fs::write(&corrupt, b"HTM1 truncated").unwrap();
    let out = run(&corrupt);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    // unparsable design
    std::fs::write(&design, "module d(input a;\n").unwrap();
    assert_eq!(run(&constant_model(dir.path(), true)).status.code(), Some(1));
}

#[test]
fn argument_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(htgnn(&["detect"]).status.code(), Some(1));
    assert_eq!(htgnn(&["synth-corpus", "--free", "0", "--out", s(dir.path())]).status.code(), Some(1));
    let out =
        htgnn(&["extract", "--dialect", "rtl", "--manifest", s(&dir.path().join("none.tsv")), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "dialect = \"rtl\"\nmanifest = \"m.tsv\"\nmomentum = 0.9\n").unwrap();
    let out = htgnn(&["eval", "--config", s(&cfg), "--report", s(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(htgnn(&["--help"]).status.code(), Some(0));
}
