// SPDX-License-Identifier: Apache-2.0

use crate::node::{Dialect, NodeKind};

use super::vocab::{netlist_op_tag, rtl_op_tag, Vocabulary};
use super::{DataFlowGraph, GraphError, NodeTag};

/// Tags every node of an RTL graph: operations by operator, constants as
/// `constant`, signals by name.
pub fn tag_rtl(g: &DataFlowGraph) -> Result<DataFlowGraph, GraphError> {
    if g.dialect != Dialect::Rtl {
        return Err(GraphError::WrongDialect { op: "tag_rtl", expected: Dialect::Rtl });
    }
    let v = Vocabulary::rtl();
    let fixed = |label: &str| v.tag(label).expect("fixed RTL tag");
    let mut out = g.clone();
    for node in &mut out.nodes {
        node.tag = Some(match node.kind {
            NodeKind::Signal => v.match_signal(&node.name),
            NodeKind::Constant => fixed("constant"),
            NodeKind::Branch => fixed("branch"),
            NodeKind::BranchCondition => fixed("branch_condition"),
            NodeKind::Operation => match node.op {
                Some(op) => fixed(rtl_op_tag(op)),
                None => fixed("cell"),
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NormalizeReport {
    /// Operation nodes that fell back to `unknown_op`.
    pub unknown_ops: usize,
}

/// Maps every node of a netlist graph to the 17-class vocabulary.
///
/// Signals are classified by data flow. Edges run from a value to what it
/// depends on, so a signal that depends on nothing (no successors) is an
/// `input`; a root, or a signal nothing depends on (no predecessors), is an
/// `output`; all others are `intermediate_signal`.
pub fn normalize_netlist(g: &DataFlowGraph) -> Result<(DataFlowGraph, NormalizeReport), GraphError> {
    if g.dialect != Dialect::Netlist {
        return Err(GraphError::WrongDialect { op: "normalize_netlist", expected: Dialect::Netlist });
    }
    let v = Vocabulary::netlist();
    let tag = |label: &str| -> NodeTag { v.tag(label).expect("fixed netlist tag") };
    let indeg = g.in_degrees();
    let outdeg = g.out_degrees();
    let mut is_root = vec![false; g.len()];
    for &r in &g.roots {
        is_root[r] = true;
    }
    let mut report = NormalizeReport::default();
    let mut out = g.clone();
    for (i, node) in out.nodes.iter_mut().enumerate() {
        node.tag = Some(match node.kind {
            NodeKind::Signal if outdeg[i] == 0 => tag("input"),
            NodeKind::Signal if is_root[i] || indeg[i] == 0 => tag("output"),
            NodeKind::Signal => tag("intermediate_signal"),
            NodeKind::Constant => tag("constant"),
            NodeKind::Branch => tag("branch"),
            NodeKind::BranchCondition => tag("branch_condition"),
            NodeKind::Operation => match node.op.and_then(netlist_op_tag) {
                Some(label) => tag(label),
                None => {
                    report.unknown_ops += 1;
                    tag("unknown_op")
                }
            },
        });
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;
    use crate::node::Op;

    fn labels(g: &DataFlowGraph) -> Vec<&'static str> {
        g.nodes.iter().map(|n| n.tag.unwrap().label(g.dialect)).collect()
    }

    #[test]
    fn netlist_classes() {
        let g = DataFlowGraph {
            dialect: Dialect::Netlist,
            nodes: vec![
                Node::signal("y"),
                Node::operation(Op::And),
                Node::signal("n1"),
                Node::operation(Op::Not),
                Node::signal("a"),
                Node::constant("3"),
                Node::constant("7"),
                Node::operation(Op::Add),
            ],
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (1, 7), (7, 6)],
            roots: vec![0],
        };
        let (t, report) = normalize_netlist(&g).unwrap();
        assert_eq!(
            labels(&t),
            ["output", "and", "intermediate_signal", "not", "input", "constant", "constant", "unknown_op"]
        );
        assert_eq!(report.unknown_ops, 1);
        assert_eq!(normalize_netlist(&t).unwrap().0, t);
    }

    #[test]
    fn rtl_tags() {
        let g = DataFlowGraph {
            dialect: Dialect::Rtl,
            nodes: vec![Node::signal("sys_clock"), Node::operation(Op::Xor), Node::signal("zq9x"), Node::constant("1")],
            edges: vec![(0, 1), (1, 2), (1, 3)],
            roots: vec![0],
        };
        let t = tag_rtl(&g).unwrap();
        assert_eq!(labels(&t), ["clock", "xor", "general", "constant"]);
        assert!(t.nodes[1].tag.unwrap().index < 28);
        assert!(normalize_netlist(&g).is_err());
    }
}
