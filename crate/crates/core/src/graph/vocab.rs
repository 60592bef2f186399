// SPDX-License-Identifier: Apache-2.0

//! Fixed node-tag vocabularies.
//!
//! RTL (300 tags, in index order):
//!
//! | index   | tags |
//! |---------|------|
//! | 0..28   | add sub mul div mod pow and or xor xnor not land lor lnot shl shr ashl ashr lt gt le ge eq ne ceq cne branch reduction_or |
//! | 28      | constant |
//! | 29..35  | branch_condition concat partselect pointer multi_driver cell |
//! | 35      | general |
//! | 36..300 | signal-name tags from `data/rtl_signal_names.txt` |
//!
//! Netlist (17 tags): input output intermediate_signal constant and or nand
//! nor xor xnor not buf mux dff branch branch_condition unknown_op.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::node::{Dialect, Op};

/// Bumped whenever either tag table changes.
pub const VOCAB_VERSION: u32 = 1;

pub const RTL_SIZE: usize = 300;
pub const NETLIST_SIZE: usize = 17;

pub const RTL_OPERATION_TAGS: [&str; 28] = [
    "add",
    "sub",
    "mul",
    "div",
    "mod",
    "pow",
    "and",
    "or",
    "xor",
    "xnor",
    "not",
    "land",
    "lor",
    "lnot",
    "shl",
    "shr",
    "ashl",
    "ashr",
    "lt",
    "gt",
    "le",
    "ge",
    "eq",
    "ne",
    "ceq",
    "cne",
    "branch",
    "reduction_or",
];

const RTL_STRUCTURAL_TAGS: [&str; 8] =
    ["constant", "branch_condition", "concat", "partselect", "pointer", "multi_driver", "cell", "general"];

pub const NETLIST_TAGS: [&str; NETLIST_SIZE] = [
    "input",
    "output",
    "intermediate_signal",
    "constant",
    "and",
    "or",
    "nand",
    "nor",
    "xor",
    "xnor",
    "not",
    "buf",
    "mux",
    "dff",
    "branch",
    "branch_condition",
    "unknown_op",
];

const SIGNAL_NAMES: &str = include_str!("../../data/rtl_signal_names.txt");

/// Index into the vocabulary of the graph's dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeTag {
    pub index: u32,
}

impl NodeTag {
    pub fn label(self, dialect: Dialect) -> &'static str {
        Vocabulary::for_dialect(dialect).label(self.index as usize)
    }
}

#[derive(Debug)]
pub struct Vocabulary {
    labels: Vec<&'static str>,
    by_label: HashMap<&'static str, usize>,
    /// (pattern, tag index) in file order.
    patterns: Vec<(&'static str, usize)>,
}

impl Vocabulary {
    pub fn rtl() -> &'static Vocabulary {
        static RTL: OnceLock<Vocabulary> = OnceLock::new();
        RTL.get_or_init(|| {
            let mut labels: Vec<&'static str> = RTL_OPERATION_TAGS.to_vec();
            labels.extend(RTL_STRUCTURAL_TAGS);
            let mut patterns = Vec::new();
            for line in SIGNAL_NAMES.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let mut words = line.split_whitespace();
                let tag = words.next().expect("non-empty line");
                let idx = labels.len();
                labels.push(tag);
                let mut any = false;
                for p in words {
                    patterns.push((p, idx));
                    any = true;
                }
                if !any {
                    patterns.push((tag, idx));
                }
            }
            assert_eq!(labels.len(), RTL_SIZE, "RTL vocabulary must have {RTL_SIZE} entries");
            Vocabulary::build(labels, patterns)
        })
    }

    pub fn netlist() -> &'static Vocabulary {
        static NETLIST: OnceLock<Vocabulary> = OnceLock::new();
        NETLIST.get_or_init(|| Vocabulary::build(NETLIST_TAGS.to_vec(), Vec::new()))
    }

    pub fn for_dialect(dialect: Dialect) -> &'static Vocabulary {
        match dialect {
            Dialect::Rtl => Vocabulary::rtl(),
            Dialect::Netlist => Vocabulary::netlist(),
        }
    }

    fn build(labels: Vec<&'static str>, patterns: Vec<(&'static str, usize)>) -> Self {
        let mut by_label = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            let prev = by_label.insert(*l, i);
            assert!(prev.is_none(), "duplicate tag `{l}`");
        }
        Vocabulary { labels, by_label, patterns }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> &'static str {
        self.labels[index]
    }

    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn tag(&self, label: &str) -> Option<NodeTag> {
        self.by_label.get(label).map(|&i| NodeTag { index: i as u32 })
    }

    /// Tag for a signal name: the longest pattern contained in the lowercase
    /// name wins, ties going to the earlier pattern; `general` otherwise.
    /// Only the last component of a hierarchical name is considered.
    pub fn match_signal(&self, name: &str) -> NodeTag {
        let local = name.rsplit('.').next().unwrap_or(name).to_ascii_lowercase();
        let mut best: Option<(usize, usize)> = None;
        for &(pattern, idx) in &self.patterns {
            if pattern.len() > best.map_or(0, |b| b.0) && local.contains(pattern) {
                best = Some((pattern.len(), idx));
            }
        }
        match best {
            Some((_, idx)) => NodeTag { index: idx as u32 },
            None => self.tag("general").expect("RTL vocabulary has `general`"),
        }
    }
}

/// RTL tag for an operation; several operators share a tag.
pub fn rtl_op_tag(op: Op) -> &'static str {
    match op {
        Op::Add => "add",
        Op::Sub | Op::Neg => "sub",
        Op::Mul => "mul",
        Op::Div => "div",
        Op::Mod => "mod",
        Op::Pow => "pow",
        Op::And | Op::Nand | Op::ReduceAnd | Op::ReduceNand => "and",
        Op::Or | Op::Nor => "or",
        Op::Xor | Op::ReduceXor => "xor",
        Op::Xnor | Op::ReduceXnor => "xnor",
        Op::Not => "not",
        Op::LogicAnd => "land",
        Op::LogicOr => "lor",
        Op::LogicNot => "lnot",
        Op::Shl => "shl",
        Op::Shr => "shr",
        Op::AShl => "ashl",
        Op::AShr => "ashr",
        Op::Lt => "lt",
        Op::Gt => "gt",
        Op::Le => "le",
        Op::Ge => "ge",
        Op::Eq => "eq",
        Op::Ne => "ne",
        Op::CaseEq => "ceq",
        Op::CaseNe => "cne",
        Op::ReduceOr | Op::ReduceNor => "reduction_or",
        Op::Concat => "concat",
        Op::PartSelect => "partselect",
        Op::Pointer => "pointer",
        Op::MultiDriver => "multi_driver",
        Op::Buf | Op::Mux | Op::Dff | Op::Cell => "cell",
    }
}

/// Netlist gate class; `None` for operations counted as `unknown_op`.
pub fn netlist_op_tag(op: Op) -> Option<&'static str> {
    Some(match op {
        Op::And | Op::ReduceAnd | Op::LogicAnd => "and",
        Op::Or | Op::ReduceOr | Op::LogicOr => "or",
        Op::Nand | Op::ReduceNand => "nand",
        Op::Nor | Op::ReduceNor => "nor",
        Op::Xor | Op::ReduceXor => "xor",
        Op::Xnor | Op::ReduceXnor => "xnor",
        Op::Not | Op::LogicNot => "not",
        Op::Buf => "buf",
        Op::Mux => "mux",
        Op::Dff => "dff",
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(Vocabulary::rtl().len(), 300);
        assert_eq!(Vocabulary::netlist().len(), 17);
        assert_eq!(Vocabulary::rtl().tag("general").unwrap().index, 35);
        assert_eq!(Vocabulary::rtl().tag("constant").unwrap().index, 28);
    }

    #[test]
    fn operation_tags_cover_all_ops() {
        let v = Vocabulary::rtl();
        for &op in Op::ALL {
            assert!(v.tag(rtl_op_tag(op)).is_some(), "{op}");
        }
    }

    #[test]
    fn name_matching() {
        let v = Vocabulary::rtl();
        let label = |n: &str| v.label(v.match_signal(n).index as usize);
        assert_eq!(label("sys_clock"), "clock");
        assert_eq!(label("CLK"), "clock");
        assert_eq!(label("zq9x"), "general");
        assert_eq!(label("u_core.rst_n"), "reset");
        // `counter` is longer than `event`
        assert_eq!(label("event_counter"), "counter");
    }
}
