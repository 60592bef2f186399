// SPDX-License-Identifier: Apache-2.0

//! Per-signal data-flow graphs.
//!
//! Each graph is a tree rooted at the analyzed signal. Edges point from a
//! dependent node to the node it depends on. Every signal read on the right
//! hand side becomes its own leaf, including the root's own name for
//! sequential feedback, so the graphs stay acyclic until they are merged.

use std::fmt;

use crate::node::{NodeKind, Op};

use super::ast::DesignAst;
use super::elaborate::{elaborate, DTree, Elaborated, SignalClass};
use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DfgNode {
    pub kind: NodeKind,
    /// Signal name, constant literal, or operation mnemonic.
    pub label: String,
    pub op: Option<Op>,
}

impl DfgNode {
    pub fn signal(name: &str) -> Self {
        DfgNode { kind: NodeKind::Signal, label: name.to_string(), op: None }
    }

    pub fn constant(value: &str) -> Self {
        DfgNode { kind: NodeKind::Constant, label: value.to_string(), op: None }
    }

    pub fn operation(op: Op) -> Self {
        DfgNode { kind: NodeKind::Operation, label: op.mnemonic().to_string(), op: Some(op) }
    }

    pub fn branch() -> Self {
        DfgNode { kind: NodeKind::Branch, label: "branch".into(), op: None }
    }

    pub fn branch_condition() -> Self {
        DfgNode { kind: NodeKind::BranchCondition, label: "branch_condition".into(), op: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalDfg {
    pub root: String,
    /// The root is an output port of the top module.
    pub root_is_output: bool,
    /// Node 0 is the root.
    pub nodes: Vec<DfgNode>,
    pub edges: Vec<(usize, usize)>,
}

impl SignalDfg {
    pub fn children(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |(s, _)| *s == n).map(|(_, d)| *d)
    }

    fn push(&mut self, node: DfgNode, parent: Option<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(node);
        if let Some(p) = parent {
            self.edges.push((p, id));
        }
        id
    }

    fn emit(&mut self, tree: &DTree, parent: usize) {
        match tree {
            DTree::Signal(name) => {
                self.push(DfgNode::signal(name), Some(parent));
            }
            DTree::Const(value) => {
                self.push(DfgNode::constant(value), Some(parent));
            }
            DTree::Op(op, children) => {
                let id = self.push(DfgNode::operation(*op), Some(parent));
                for c in children {
                    self.emit(c, id);
                }
            }
            DTree::Branch { cond, then, otherwise } => {
                let id = self.push(DfgNode::branch(), Some(parent));
                let c = self.push(DfgNode::branch_condition(), Some(id));
                self.emit(cond, c);
                for arm in [then, otherwise].into_iter().flatten() {
                    self.emit(arm, id);
                }
            }
        }
    }
}

/// Line-oriented text form used for golden files.
impl fmt::Display for SignalDfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dfg {} output={}", self.root, self.root_is_output)?;
        for (i, n) in self.nodes.iter().enumerate() {
            match n.kind {
                NodeKind::Branch | NodeKind::BranchCondition => writeln!(f, "n{i} {}", n.kind.as_str())?,
                _ => writeln!(f, "n{i} {} {}", n.kind.as_str(), n.label)?,
            }
        }
        for (s, d) in &self.edges {
            writeln!(f, "e {s} {d}")?;
        }
        Ok(())
    }
}

/// Elaborated design from which any number of signals can be analyzed.
#[derive(Debug, Clone)]
pub struct Dataflow {
    design: Elaborated,
}

impl Dataflow {
    pub fn new(ast: &DesignAst) -> Result<Self, FrontendError> {
        Ok(Dataflow { design: elaborate(ast)? })
    }

    pub fn top(&self) -> Option<&str> {
        self.design.top.as_deref()
    }

    /// Assignable signals in declaration order: outputs, regs, and driven
    /// wires (including inlined instance ports).
    pub fn signals(&self) -> Vec<String> {
        self.design
            .signals
            .values()
            .filter(|s| {
                let driven = !self.design.drivers_of(&s.name).is_empty();
                match s.class {
                    SignalClass::Output | SignalClass::Inout => s.top_port || driven,
                    SignalClass::Reg => true,
                    SignalClass::Wire | SignalClass::Input => driven,
                }
            })
            .map(|s| s.name.clone())
            .collect()
    }

    /// Input ports of the top module.
    pub fn inputs(&self) -> Vec<String> {
        self.design
            .signals
            .values()
            .filter(|s| s.top_port && s.class == SignalClass::Input)
            .map(|s| s.name.clone())
            .collect()
    }

    pub fn analyze(&self, signal: &str) -> Result<SignalDfg, FrontendError> {
        let decl = self.design.signals.get(signal).ok_or_else(|| FrontendError::UnknownSignal(signal.to_string()))?;
        let mut g = SignalDfg {
            root: signal.to_string(),
            root_is_output: decl.top_port && matches!(decl.class, SignalClass::Output | SignalClass::Inout),
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        g.push(DfgNode::signal(signal), None);
        let drivers = self.design.drivers_of(signal);
        match drivers {
            [] => {}
            [d] => g.emit(&d.tree, 0),
            many => {
                let op = if many.iter().all(|d| d.partial) { Op::Concat } else { Op::MultiDriver };
                let join = g.push(DfgNode::operation(op), Some(0));
                for d in many {
                    g.emit(&d.tree, join);
                }
            }
        }
        Ok(g)
    }

    /// Graphs for every assignable signal, in [`Dataflow::signals`] order.
    pub fn analyze_all(&self) -> Vec<SignalDfg> {
        self.signals().iter().map(|s| self.analyze(s).expect("listed signals are declared")).collect()
    }
}

pub fn analyze_dataflow(ast: &DesignAst, signal: &str) -> Result<SignalDfg, FrontendError> {
    Dataflow::new(ast)?.analyze(signal)
}

pub fn list_signals(ast: &DesignAst) -> Result<Vec<String>, FrontendError> {
    Ok(Dataflow::new(ast)?.signals())
}
