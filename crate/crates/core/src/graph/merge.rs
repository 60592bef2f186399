// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::hdl::SignalDfg;
use crate::node::{Dialect, NodeKind};

use super::{DataFlowGraph, EdgeSet, GraphError, Node};

/// Fuses per-signal graphs into one graph.
///
/// Graphs are laid out as a disjoint union. A signal leaf that names the root
/// of some graph gets an edge to that root, so the leaf becomes a same-name
/// pass-through that [`super::trim`] later contracts. Leaves naming no root
/// (undriven inputs) are shared: every occurrence of such a name maps to one
/// node.
pub fn merge(graphs: &[SignalDfg], dialect: Dialect) -> Result<DataFlowGraph, GraphError> {
    if graphs.is_empty() {
        return Err(GraphError::EmptyInput);
    }
    let mut g = DataFlowGraph::new(dialect);
    let mut root_of: HashMap<&str, usize> = HashMap::new();
    let mut offsets = Vec::with_capacity(graphs.len());

    // Pass 1: roots first so leaf lookups can resolve.
    for dfg in graphs {
        offsets.push(g.len());
        let id = g.add_node(Node::signal(&dfg.root));
        root_of.entry(dfg.root.as_str()).or_insert(id);
        if dfg.root_is_output {
            g.roots.push(id);
        }
    }

    let mut shared_inputs: HashMap<String, usize> = HashMap::new();
    let mut edges = EdgeSet::default();
    let mut feedback = Vec::new();
    for (gi, dfg) in graphs.iter().enumerate() {
        let out_deg = {
            let mut d = vec![0usize; dfg.nodes.len()];
            for &(s, _) in &dfg.edges {
                d[s] += 1;
            }
            d
        };
        let mut map = vec![usize::MAX; dfg.nodes.len()];
        map[0] = offsets[gi];
        for (i, n) in dfg.nodes.iter().enumerate().skip(1) {
            let is_signal_leaf = n.kind == NodeKind::Signal && out_deg[i] == 0;
            map[i] = if is_signal_leaf && !root_of.contains_key(n.label.as_str()) {
                *shared_inputs.entry(n.label.clone()).or_insert_with(|| g.add_node(Node::signal(&n.label)))
            } else {
                let id = g.add_node(Node::new(n.kind, &n.label, n.op));
                if is_signal_leaf {
                    feedback.push((id, root_of[n.label.as_str()]));
                }
                id
            };
        }
        for &(s, d) in &dfg.edges {
            edges.insert(map[s], map[d]);
        }
    }
    for (leaf, root) in feedback {
        edges.insert(leaf, root);
    }
    g.edges = edges.edges;
    Ok(g)
}
