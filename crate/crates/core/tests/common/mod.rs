// SPDX-License-Identifier: Apache-2.0

//! Independent oracles and random generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::path::{Path, PathBuf};

use htgnn_core::graph::{DataFlowGraph, Node};
use htgnn_core::hdl::{Dataflow, SourceFile};
use htgnn_core::{Dialect, NodeKind, Op};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/frontend")
}

/// `(verilog, golden, dialect)` for every fixture, sorted by path.
pub fn fixtures() -> Vec<(PathBuf, PathBuf, Dialect)> {
    let mut out = Vec::new();
    for dialect in [Dialect::Rtl, Dialect::Netlist] {
        let dir = fixture_dir().join(dialect.to_string());
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "v"))
            .collect();
        files.sort();
        out.extend(files.into_iter().map(|v| (v.clone(), v.with_extension("dfg"), dialect)));
    }
    out
}

/// Text form of every per-signal graph of a design, in signal order.
pub fn render_dfgs(path: &Path, dialect: Dialect) -> String {
    let src = SourceFile::read(path).unwrap();
    let ast = htgnn_core::hdl::load_design(&[src], dialect).unwrap();
    Dataflow::new(&ast).unwrap().analyze_all().iter().map(|g| g.to_string()).collect()
}

/// `D^-1/2 (A_sym + I) D^-1/2` built densely from the definition.
pub fn dense_norm_adj(n: usize, edges: &[(usize, usize)]) -> Array2<f64> {
    let mut a = Array2::<f64>::eye(n);
    for &(s, d) in edges {
        a[[s, d]] = 1.0;
        a[[d, s]] = 1.0;
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] / (deg[i] * deg[j]).sqrt())
}

pub fn random_edges(rng: &mut impl Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..extra {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    edges
}

/// Indices of the `k` largest scores by full sort, ties to the lower index.
pub fn sort_top_k(scores: &[f64], k: usize) -> BTreeSet<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.into_iter().take(k).collect()
}

/// Random netlist graph with gates, constants, concatenations and
/// well-formed part selects. Signal names are unique.
pub fn random_netlist(rng: &mut impl Rng, max_nodes: usize) -> DataFlowGraph {
    let mut g = DataFlowGraph::new(Dialect::Netlist);
    let n_signals = rng.gen_range(2..=(max_nodes / 4).max(2));
    for i in 0..n_signals {
        g.add_node(Node::signal(format!("s{i}")));
    }
    let gates = [Op::And, Op::Or, Op::Xor, Op::Not, Op::Nand, Op::Mux, Op::Dff];
    let mut edges = BTreeSet::new();
    while g.len() + 3 <= max_nodes {
        let parent = rng.gen_range(0..g.len());
        if g.nodes[parent].kind == NodeKind::Constant || g.nodes[parent].op == Some(Op::PartSelect) {
            continue;
        }
        let roll: f64 = rng.gen();
        let child = if roll < 0.15 {
            let ps = g.add_node(Node::operation(Op::PartSelect));
            let data = rng.gen_range(0..g.len() - 1);
            let hi = g.add_node(Node::constant(rng.gen_range(0..16).to_string()));
            let lo = g.add_node(Node::constant(rng.gen_range(0..16).to_string()));
            g.edges.extend([(ps, data), (ps, hi), (ps, lo)]);
            ps
        } else if roll < 0.3 {
            g.add_node(Node::operation(Op::Concat))
        } else if roll < 0.55 {
            g.add_node(Node::operation(*gates.choose(rng).unwrap()))
        } else if roll < 0.62 {
            g.add_node(Node::constant("1'b0"))
        } else {
            rng.gen_range(0..g.len())
        };
        if child != parent && !g.edges.contains(&(parent, child)) && edges.insert((parent, child)) {
            g.edges.push((parent, child));
        }
    }
    g.roots = vec![0];
    g
}

/// Pairs `(a, b)` of signal names with `b` reachable from `a` along edges.
pub fn signal_reachability(g: &DataFlowGraph) -> BTreeSet<(String, String)> {
    let succ = g.successors();
    let mut out = BTreeSet::new();
    for s in 0..g.len() {
        if g.nodes[s].kind != NodeKind::Signal {
            continue;
        }
        let mut seen = vec![false; g.len()];
        let mut queue: VecDeque<usize> = succ[s].iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            if seen[x] {
                continue;
            }
            seen[x] = true;
            if g.nodes[x].kind == NodeKind::Signal {
                out.insert((g.nodes[s].name.clone(), g.nodes[x].name.clone()));
            }
            queue.extend(succ[x].iter().copied());
        }
    }
    out
}

use htgnn_core::gnn::{
    backward, cross_entropy, forward, gcn_forward, one_hot, sag_pool, Csr, Dropout, ForwardCache, GraphInput,
    ModelConfig, ModelParams, NodeFeatures, Readout,
};
use htgnn_core::graph::{optimize_netlist, FeatureMatrix};
use htgnn_core::Label;

/// Worst `|sparse - dense|` of the GCN layer over `graphs` random graphs
/// with at most `max_nodes` nodes.
pub fn gcn_oracle_worst(rng: &mut impl Rng, graphs: usize, max_nodes: usize) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..graphs {
        let n = rng.gen_range(1..=max_nodes);
        let extra = rng.gen_range(0..=2 * n);
        let edges = random_edges(rng, n, extra);
        let (din, dout) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let x = Array2::from_shape_fn((n, din), |_| rng.gen_range(-2.0..2.0));
        let w = Array2::from_shape_fn((din, dout), |_| rng.gen_range(-2.0..2.0));
        let got = gcn_forward(x.view(), &Csr::normalized(n, &edges), w.view()).unwrap();
        let want = dense_norm_adj(n, &edges).dot(&x).dot(&w).mapv(|v| v.max(0.0));
        worst = worst.max((&got - &want).iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    worst
}

/// Checks one random `(graph, pr)` pooling case against sort and dense
/// oracles. `pr = num / 20`.
pub fn pooling_case(rng: &mut impl Rng, num: usize) -> Result<(), String> {
    let n = rng.gen_range(1..=40);
    let extra = rng.gen_range(0..=n);
    let edges = random_edges(rng, n, extra);
    let d = rng.gen_range(1..=6);
    let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0));
    let w = ndarray::Array1::from_shape_fn(d, |_| rng.gen_range(-1.0..1.0));
    let adj = Csr::normalized(n, &edges);
    let p = sag_pool(x.view(), &adj, w.view(), num as f64 / 20.0).map_err(|e| e.to_string())?;

    let dense = dense_norm_adj(n, &edges);
    let scores = dense.dot(&x.dot(&w));
    let k = ((num * n).div_ceil(20)).max(1);
    if p.perm.len() != k {
        return Err(format!("n={n} pr={num}/20: kept {} nodes, expected {k}", p.perm.len()));
    }
    let want: BTreeSet<usize> = sort_top_k(scores.as_slice().unwrap(), k);
    if p.perm.iter().copied().collect::<BTreeSet<_>>() != want {
        return Err(format!("n={n} pr={num}/20: kept {:?}, expected {want:?}", p.perm));
    }
    let sub = Array2::from_shape_fn((k, k), |(a, b)| dense[[p.perm[a], p.perm[b]]]);
    if (&p.adj.to_dense() - &sub).iter().any(|v| v.abs() > 1e-12) {
        return Err(format!("n={n}: pooled adjacency is not the induced submatrix"));
    }
    for (row, &i) in p.perm.iter().enumerate() {
        let gate = scores[i].tanh();
        if (0..d).any(|c| (p.x[[row, c]] - x[[i, c]] * gate).abs() > 1e-12) {
            return Err(format!("n={n}: row {row} is not gated by tanh(score)"));
        }
    }
    if num == 20 && (p.perm != (0..n).collect::<Vec<_>>() || p.adj != adj) {
        return Err(format!("n={n}: pr=1 must keep every node and the adjacency"));
    }
    Ok(())
}

fn activation_pattern(c: &ForwardCache) -> (Vec<bool>, Vec<usize>, Vec<usize>) {
    let relu = c.pre.iter().flat_map(|z| z.iter().map(|&v| v > 0.0)).collect();
    (relu, c.perm.clone(), c.argmax.clone())
}

#[derive(Debug, Default)]
pub struct FdSummary {
    pub worst: f64,
    pub checked: usize,
    /// Coordinates whose perturbation crossed a ReLU, top-k or argmax boundary.
    pub skipped: usize,
}

/// Central differences (`h = 1e-4`) against `backward` for every parameter
/// of small random models on random 6-node graphs, dropout off.
pub fn finite_difference_check(rng: &mut impl Rng, trials: usize) -> FdSummary {
    let h = 1e-4;
    let mut s = FdSummary::default();
    for trial in 0..trials {
        let n = 6;
        let edges = random_edges(rng, n, 3);
        let features = if trial % 4 == 3 {
            NodeFeatures::OneHot(FeatureMatrix { dim: 4, hot: (0..n).map(|_| rng.gen_range(0..4)).collect() })
        } else {
            NodeFeatures::Dense(Array2::from_shape_fn((n, 4), |_| rng.gen_range(-1.0..1.0)))
        };
        let input = GraphInput::new(Csr::normalized(n, &edges), features);
        let cfg = ModelConfig {
            dialect: Dialect::Rtl,
            input_dim: 4,
            hidden: if trial % 2 == 0 { vec![5, 4] } else { vec![3, 4, 3] },
            pool_ratio: [0.6, 0.5, 1.0][trial % 3],
            readout: [Readout::Max, Readout::Mean, Readout::Sum][(trial / 3) % 3],
            dropout: 0.0,
        };
        let p = ModelParams::init(cfg, rng.gen()).unwrap();
        let label = if rng.gen_bool(0.5) { Label::Infected } else { Label::Free };
        let base = forward(&p, &input, Dropout::Off).unwrap();
        let (grad, _) = backward(&p, &input, &base, label).unwrap();
        let pattern = activation_pattern(&base);
        let loss = |q: &ModelParams| -> Option<f64> {
            let c = forward(q, &input, Dropout::Off).unwrap();
            (activation_pattern(&c) == pattern).then(|| cross_entropy(one_hot(label), c.probs))
        };
        for b in 0..p.blocks().len() {
            for k in 0..p.blocks()[b].len() {
                let mut plus = p.clone();
                plus.blocks_mut()[b][k] += h;
                let mut minus = p.clone();
                minus.blocks_mut()[b][k] -= h;
                let (Some(lp), Some(lm)) = (loss(&plus), loss(&minus)) else {
                    s.skipped += 1;
                    continue;
                };
                let num = (lp - lm) / (2.0 * h);
                let ana = grad.blocks()[b][k];
                let rel = (num - ana).abs() / num.abs().max(ana.abs()).max(1e-8);
                s.worst = s.worst.max(rel);
                s.checked += 1;
            }
        }
    }
    s
}

/// Checks one random netlist graph: signal reachability is unchanged, no
/// concatenation or part select survives, and a second pass is a no-op.
pub fn optimize_case(g: &DataFlowGraph) -> Result<(), String> {
    let o = optimize_netlist(g).map_err(|e| e.to_string())?;
    o.validate()?;
    if signal_reachability(g) != signal_reachability(&o) {
        return Err(format!("reachability changed on a {}-node graph", g.len()));
    }
    let left = o.nodes.iter().filter(|n| matches!(n.op, Some(Op::Concat | Op::PartSelect))).count();
    if left != 0 {
        return Err(format!("{left} concat/part-select nodes left"));
    }
    if optimize_netlist(&o).map_err(|e| e.to_string())? != o {
        return Err("second pass changed the graph".into());
    }
    Ok(())
}

/// Report JSON with every `timing` object removed.
pub fn without_timing(json: &str) -> serde_json::Value {
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
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    strip(&mut v);
    v
}
