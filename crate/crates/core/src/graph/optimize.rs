// SPDX-License-Identifier: Apache-2.0

use crate::node::{Dialect, NodeKind, Op};

use super::{DataFlowGraph, EdgeSet, GraphError};

/// Removes concatenation and part-select nodes from a netlist graph.
///
/// A concatenation's parents are wired to each of its children. A part
/// select `[data, msb, lsb]` is replaced by its data child and its two bound
/// constants are dropped. Nothing else changes.
pub fn optimize_netlist(g: &DataFlowGraph) -> Result<DataFlowGraph, GraphError> {
    if g.dialect != Dialect::Netlist {
        return Err(GraphError::WrongDialect { op: "optimize_netlist", expected: Dialect::Netlist });
    }
    let n = g.len();
    let succ = g.successors();
    let indeg = g.in_degrees();
    let mut keep = vec![true; n];
    for (i, node) in g.nodes.iter().enumerate() {
        match node.op {
            Some(Op::Concat) => keep[i] = false,
            Some(Op::PartSelect) => {
                let c = &succ[i];
                let bounds_ok = c.len() == 3 && c[1..].iter().all(|&b| g.nodes[b].kind == NodeKind::Constant);
                if !bounds_ok {
                    return Err(GraphError::MalformedPartSelect { node: i, children: c.len() });
                }
                keep[i] = false;
                for &b in &c[1..] {
                    if indeg[b] == 1 && succ[b].is_empty() {
                        keep[b] = false;
                    }
                }
            }
            _ => {}
        }
    }

    // Replacement targets for an edge into a removed node.
    let mut memo: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut edges = EdgeSet::default();
    for &(s, d) in &g.edges {
        if !keep[s] {
            continue;
        }
        if keep[d] {
            edges.insert(s, d);
            continue;
        }
        let targets = memo[d].get_or_insert_with(|| resolve(d, g, &succ, &keep));
        for &t in targets.iter() {
            edges.insert(s, t);
        }
    }
    let mut staged = g.clone();
    staged.edges = edges.edges;
    Ok(staged.retain(&keep))
}

/// Kept nodes reached from removed node `d` through removed nodes only, in
/// depth-first child order. Cycles among removed nodes are walked once.
fn resolve(d: usize, g: &DataFlowGraph, succ: &[Vec<usize>], keep: &[bool]) -> Vec<usize> {
    fn walk(x: usize, g: &DataFlowGraph, succ: &[Vec<usize>], keep: &[bool], seen: &mut [bool], out: &mut Vec<usize>) {
        let children: &[usize] = match g.nodes[x].op {
            Some(Op::PartSelect) => &succ[x][..1],
            Some(Op::Concat) => &succ[x],
            // a dropped bound constant
            _ => &[],
        };
        for &c in children {
            if keep[c] {
                if !out.contains(&c) {
                    out.push(c);
                }
            } else if !seen[c] {
                seen[c] = true;
                walk(c, g, succ, keep, seen, out);
            }
        }
    }
    let mut seen = vec![false; g.len()];
    seen[d] = true;
    let mut out = Vec::new();
    walk(d, g, succ, keep, &mut seen, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Node;

    fn netlist(nodes: Vec<Node>, edges: &[(usize, usize)], roots: &[usize]) -> DataFlowGraph {
        DataFlowGraph { dialect: Dialect::Netlist, nodes, edges: edges.to_vec(), roots: roots.to_vec() }
    }

    fn names(g: &DataFlowGraph) -> Vec<&str> {
        g.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    #[test]
    fn concat_removed() {
        let g = netlist(
            vec![
                Node::signal("Y"),
                Node::operation(Op::Or),
                Node::operation(Op::Concat),
                Node::signal("A"),
                Node::signal("B"),
            ],
            &[(0, 1), (1, 2), (2, 3), (2, 4)],
            &[0],
        );
        let o = optimize_netlist(&g).unwrap();
        assert_eq!(names(&o), ["Y", "or", "A", "B"]);
        assert_eq!(o.edges, [(0, 1), (1, 2), (1, 3)]);
    }

    #[test]
    fn partselect_removed_with_bounds() {
        let g = netlist(
            vec![
                Node::signal("B"),
                Node::operation(Op::PartSelect),
                Node::signal("A"),
                Node::constant("10"),
                Node::constant("5"),
            ],
            &[(0, 1), (1, 2), (1, 3), (1, 4)],
            &[0],
        );
        let o = optimize_netlist(&g).unwrap();
        assert_eq!(names(&o), ["B", "A"]);
        assert_eq!(o.edges, [(0, 1)]);
        assert_eq!(optimize_netlist(&o).unwrap(), o);
    }

    #[test]
    fn malformed_partselect() {
        let g = netlist(
            vec![Node::signal("B"), Node::operation(Op::PartSelect), Node::signal("A")],
            &[(0, 1), (1, 2)],
            &[0],
        );
        assert_eq!(optimize_netlist(&g), Err(GraphError::MalformedPartSelect { node: 1, children: 1 }));
    }

    #[test]
    fn other_nodes_untouched() {
        let g = netlist(
            vec![Node::signal("y"), Node::operation(Op::Xor), Node::signal("a"), Node::constant("1'b1")],
            &[(0, 1), (1, 2), (1, 3)],
            &[0],
        );
        assert_eq!(optimize_netlist(&g).unwrap(), g);
    }
}
