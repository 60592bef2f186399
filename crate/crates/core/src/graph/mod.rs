// SPDX-License-Identifier: Apache-2.0

//! Whole-design data-flow graphs: merging per-signal graphs, cleanup
//! passes, tagging, feature encoding and the on-disk format.

mod features;
mod io;
mod merge;
mod optimize;
mod tagging;
mod trim;
pub mod vocab;

use std::collections::HashSet;

pub use features::{encode_features, FeatureMatrix};
pub use io::{load_graph, save_graph, to_json, GraphFile};
pub use merge::merge;
pub use optimize::optimize_netlist;
pub use tagging::{normalize_netlist, tag_rtl, NormalizeReport};
pub use trim::{trim, TrimReport};
pub use vocab::{NodeTag, Vocabulary, VOCAB_VERSION};

use crate::node::{Dialect, NodeKind, Op};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("no graphs to merge")]
    EmptyInput,
    #[error("part-select node {node} must have a data child and two constant bounds, found {children} children")]
    MalformedPartSelect { node: usize, children: usize },
    #[error("{op} requires a {expected} graph")]
    WrongDialect { op: &'static str, expected: Dialect },
    #[error("node {0} has no tag")]
    UntaggedNode(usize),
    #[error("corrupt graph file: {0}")]
    CorruptFile(String),
    #[error("vocabulary version mismatch: file has {found}, expected {expected}")]
    VersionMismatch { expected: u32, found: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Signal name, constant literal, or operation mnemonic.
    pub name: String,
    pub op: Option<Op>,
    pub tag: Option<NodeTag>,
}

impl Node {
    pub fn new(kind: NodeKind, name: impl Into<String>, op: Option<Op>) -> Self {
        Node { kind, name: name.into(), op, tag: None }
    }

    pub fn signal(name: impl Into<String>) -> Self {
        Node::new(NodeKind::Signal, name, None)
    }

    pub fn constant(value: impl Into<String>) -> Self {
        Node::new(NodeKind::Constant, value, None)
    }

    pub fn operation(op: Op) -> Self {
        Node::new(NodeKind::Operation, op.mnemonic(), Some(op))
    }
}

/// Directed graph with edges from dependent to dependee. Node ids are
/// dense indices into `nodes`; edges keep insertion order and never repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFlowGraph {
    pub dialect: Dialect,
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, usize)>,
    /// Output-signal nodes.
    pub roots: Vec<usize>,
}

impl DataFlowGraph {
    pub fn new(dialect: Dialect) -> Self {
        DataFlowGraph { dialect, nodes: Vec::new(), edges: Vec::new(), roots: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Children lists in edge order.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for &(s, d) in &self.edges {
            out[s].push(d);
        }
        out
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for &(s, d) in &self.edges {
            out[d].push(s);
        }
        out
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(_, d) in &self.edges {
            deg[d] += 1;
        }
        deg
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for &(s, _) in &self.edges {
            deg[s] += 1;
        }
        deg
    }

    /// Structural checks: ids in range, no duplicate edges, roots valid.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.nodes.len();
        let mut seen = HashSet::new();
        for &(s, d) in &self.edges {
            if s >= n || d >= n {
                return Err(format!("edge ({s},{d}) out of range for {n} nodes"));
            }
            if !seen.insert((s, d)) {
                return Err(format!("duplicate edge ({s},{d})"));
            }
        }
        for &r in &self.roots {
            if r >= n {
                return Err(format!("root {r} out of range"));
            }
        }
        Ok(())
    }

    /// Keeps the nodes where `keep` is true, renumbering densely in the
    /// original order. Edges and roots touching dropped nodes are removed.
    pub fn retain(&self, keep: &[bool]) -> DataFlowGraph {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut out = DataFlowGraph::new(self.dialect);
        for (i, node) in self.nodes.iter().enumerate() {
            if keep[i] {
                map[i] = out.add_node(node.clone());
            }
        }
        out.edges = self.edges.iter().filter(|(s, d)| keep[*s] && keep[*d]).map(|&(s, d)| (map[s], map[d])).collect();
        out.roots = self.roots.iter().filter(|&&r| keep[r]).map(|&r| map[r]).collect();
        out
    }

    /// Nodes reachable from `start` along edge direction, excluding `start`
    /// unless it lies on a cycle.
    pub fn reachable_from(&self, start: usize, succ: &[Vec<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = succ[start].clone();
        while let Some(n) = stack.pop() {
            if !seen[n] {
                seen[n] = true;
                stack.extend(succ[n].iter().copied().filter(|&m| !seen[m]));
            }
        }
        seen
    }
}

/// Edge list builder that drops duplicates while keeping first-seen order.
#[derive(Debug, Default)]
pub(crate) struct EdgeSet {
    seen: HashSet<(usize, usize)>,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn insert(&mut self, s: usize, d: usize) {
        if self.seen.insert((s, d)) {
            self.edges.push((s, d));
        }
    }
}
