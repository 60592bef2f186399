// SPDX-License-Identifier: Apache-2.0

mod common;

use htgnn_core::graph::vocab::{NETLIST_SIZE, RTL_SIZE};
use htgnn_core::graph::{
    encode_features, load_graph, normalize_netlist, optimize_netlist, save_graph, tag_rtl, trim, DataFlowGraph, Node,
};
use htgnn_core::{Dialect, Label, NodeKind, Op};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn optimize_preserves_reachability_and_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let max = rng.gen_range(8..=200);
        let g = common::random_netlist(&mut rng, max);
        assert!(g.len() <= 200);
        common::optimize_case(&g).unwrap();
    }
}

#[test]
fn optimize_handles_cycles_of_concatenations() {
    // 1 -> 2 -> 1 with 2 also feeding `a`: every entry point must reach `a`
    let g = DataFlowGraph {
        dialect: Dialect::Netlist,
        nodes: vec![
            Node::signal("y"),
            Node::operation(Op::Concat),
            Node::operation(Op::Concat),
            Node::signal("a"),
            Node::signal("z"),
        ],
        edges: vec![(0, 1), (1, 2), (2, 1), (2, 3), (4, 2)],
        roots: vec![0, 4],
    };
    let o = optimize_netlist(&g).unwrap();
    assert_eq!(o.edges, [(0, 1), (2, 1)]);
    common::optimize_case(&g).unwrap();
}

fn random_rtl(rng: &mut impl Rng, n: usize) -> DataFlowGraph {
    let mut g = DataFlowGraph::new(Dialect::Rtl);
    let names = ["a", "b", "cnt", "q", "d", "en"];
    for i in 0..n {
        let node = match rng.gen_range(0..4) {
            0 | 1 => Node::signal(names[rng.gen_range(0..names.len())]),
            2 => Node::operation([Op::Add, Op::And, Op::Eq, Op::Mux][rng.gen_range(0..4)]),
            _ => Node::constant(["0", "1", "8'hff"][i % 3]),
        };
        g.add_node(node);
    }
    let mut seen = std::collections::HashSet::new();
    for _ in 0..n + n / 2 {
        let (s, d) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if s != d && g.nodes[s].kind != NodeKind::Constant && seen.insert((s, d)) {
            g.edges.push((s, d));
        }
    }
    g.roots = (0..n).filter(|&i| g.nodes[i].kind == NodeKind::Signal).take(2).collect();
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn optimize_semantics(seed in any::<u64>(), max in 8usize..120) {
        let g = common::random_netlist(&mut ChaCha8Rng::seed_from_u64(seed), max);
        prop_assert_eq!(common::optimize_case(&g), Ok(()));
    }

    #[test]
    fn trim_is_idempotent(seed in any::<u64>(), n in 1usize..40) {
        let g = random_rtl(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let (once, _) = trim(&g);
        prop_assert!(once.validate().is_ok());
        let (twice, report) = trim(&once);
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(report.removed, 0);
    }

    #[test]
    fn normalize_is_idempotent_and_total(seed in any::<u64>(), max in 8usize..80) {
        let g = optimize_netlist(&common::random_netlist(&mut ChaCha8Rng::seed_from_u64(seed), max)).unwrap();
        let (t, _) = normalize_netlist(&g).unwrap();
        prop_assert_eq!(&normalize_netlist(&t).unwrap().0, &t);
        let f = encode_features(&t).unwrap();
        prop_assert_eq!(f.dim, NETLIST_SIZE);
        prop_assert_eq!(f.rows(), t.len());
        let dense = f.to_dense();
        prop_assert!(dense.rows().into_iter().all(|r| r.sum() == 1.0));
    }

    #[test]
    fn serialized_graphs_round_trip(seed in any::<u64>(), n in 1usize..40, label in 0u8..3) {
        let g = tag_rtl(&random_rtl(&mut ChaCha8Rng::seed_from_u64(seed), n)).unwrap();
        let label = [None, Some(Label::Free), Some(Label::Infected)][label as usize];
        let file = load_graph(&save_graph(&g, label).unwrap()).unwrap();
        prop_assert_eq!(&file.graph, &g);
        prop_assert_eq!(file.label, label);
        prop_assert_eq!(file.features.dim, RTL_SIZE);
    }
}
