// SPDX-License-Identifier: Apache-2.0

//! Node vocabulary shared by per-signal and merged data-flow graphs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Source abstraction level of a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Rtl,
    Netlist,
}

impl Dialect {
    pub fn as_byte(self) -> u8 {
        match self {
            Dialect::Rtl => 0,
            Dialect::Netlist => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Dialect::Rtl),
            1 => Some(Dialect::Netlist),
            _ => None,
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::Rtl => "rtl",
            Dialect::Netlist => "netlist",
        })
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rtl" => Ok(Dialect::Rtl),
            "netlist" => Ok(Dialect::Netlist),
            other => Err(format!("unknown dialect `{other}` (expected rtl or netlist)")),
        }
    }
}

/// Structural role of a graph node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Signal,
    Operation,
    Constant,
    Branch,
    BranchCondition,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] =
        [NodeKind::Signal, NodeKind::Operation, NodeKind::Constant, NodeKind::Branch, NodeKind::BranchCondition];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Signal => "signal",
            NodeKind::Operation => "operation",
            NodeKind::Constant => "constant",
            NodeKind::Branch => "branch",
            NodeKind::BranchCondition => "branch_condition",
        }
    }

    pub fn as_byte(self) -> u8 {
        match self {
            NodeKind::Signal => 0,
            NodeKind::Operation => 1,
            NodeKind::Constant => 2,
            NodeKind::Branch => 3,
            NodeKind::BranchCondition => 4,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        NodeKind::ALL.get(b as usize).copied()
    }

    /// Leaves of a per-signal graph are signals or constants.
    pub fn is_leaf_kind(self) -> bool {
        matches!(self, NodeKind::Signal | NodeKind::Constant)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ground truth or verdict for a design. `Infected` is the first output class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Infected,
    Free,
}

impl Label {
    /// Output class index.
    pub fn class(self) -> usize {
        match self {
            Label::Infected => 0,
            Label::Free => 1,
        }
    }

    pub fn from_class(c: usize) -> Self {
        if c == 0 {
            Label::Infected
        } else {
            Label::Free
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Infected => "infected",
            Label::Free => "free",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "infected" | "1" | "ht-infected" | "trojan" => Ok(Label::Infected),
            "free" | "0" | "ht-free" | "clean" => Ok(Label::Free),
            other => Err(format!("unknown label `{other}` (expected infected or free)")),
        }
    }
}

macro_rules! ops {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Operation carried by an operation node. The mnemonic is the node label.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Op {
            $($variant),*
        }

        impl Op {
            pub const ALL: &'static [Op] = &[$(Op::$variant),*];

            pub fn mnemonic(self) -> &'static str {
                match self {
                    $(Op::$variant => $name),*
                }
            }
        }

        impl FromStr for Op {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                match s {
                    $($name => Ok(Op::$variant),)*
                    _ => Err(()),
                }
            }
        }
    };
}

ops! {
    Add => "add",
    Sub => "sub",
    Neg => "neg",
    Mul => "mul",
    Div => "div",
    Mod => "mod",
    Pow => "pow",
    And => "and",
    Or => "or",
    Xor => "xor",
    Xnor => "xnor",
    Not => "not",
    Nand => "nand",
    Nor => "nor",
    LogicAnd => "land",
    LogicOr => "lor",
    LogicNot => "lnot",
    Shl => "shl",
    Shr => "shr",
    AShl => "ashl",
    AShr => "ashr",
    Lt => "lt",
    Gt => "gt",
    Le => "le",
    Ge => "ge",
    Eq => "eq",
    Ne => "ne",
    CaseEq => "ceq",
    CaseNe => "cne",
    ReduceAnd => "reduce_and",
    ReduceOr => "reduce_or",
    ReduceXor => "reduce_xor",
    ReduceNand => "reduce_nand",
    ReduceNor => "reduce_nor",
    ReduceXnor => "reduce_xnor",
    Concat => "concat",
    PartSelect => "partselect",
    Pointer => "pointer",
    Buf => "buf",
    Mux => "mux",
    Dff => "dff",
    MultiDriver => "multi_driver",
    Cell => "cell",
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl Op {
    /// Classifies a generic standard-cell type name (`$_AND_`, `NAND2X1`, `DFFPOSX1`, ...).
    pub fn from_cell_type(name: &str) -> Op {
        let upper = name.to_ascii_uppercase();
        let core = upper.trim_start_matches('\\').trim_start_matches('$').trim_matches('_');
        if core.contains("DFF") || core.contains("DLATCH") || core.starts_with("SDFF") || core.starts_with("FF") {
            return Op::Dff;
        }
        const PREFIXES: &[(&str, Op)] = &[
            ("NAND", Op::Nand),
            ("NOR", Op::Nor),
            ("XNOR", Op::Xnor),
            ("XOR", Op::Xor),
            ("AND", Op::And),
            ("OR", Op::Or),
            ("NOT", Op::Not),
            ("INV", Op::Not),
            ("BUF", Op::Buf),
            ("MUX", Op::Mux),
        ];
        PREFIXES.iter().find(|(p, _)| core.starts_with(p)).map(|&(_, op)| op).unwrap_or(Op::Cell)
    }

    /// Gate primitive keywords of the supported subset.
    pub fn from_gate_keyword(kw: &str) -> Option<Op> {
        Some(match kw {
            "and" => Op::And,
            "or" => Op::Or,
            "nand" => Op::Nand,
            "nor" => Op::Nor,
            "xor" => Op::Xor,
            "xnor" => Op::Xnor,
            "not" => Op::Not,
            "buf" => Op::Buf,
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mnemonics_round_trip() {
        for &op in Op::ALL {
            assert_eq!(op.mnemonic().parse::<Op>(), Ok(op));
        }
    }

    #[test]
    fn cell_names() {
        assert_eq!(Op::from_cell_type("$_AND_"), Op::And);
        assert_eq!(Op::from_cell_type("$_NAND_"), Op::Nand);
        assert_eq!(Op::from_cell_type("$_DFF_P_"), Op::Dff);
        assert_eq!(Op::from_cell_type("NOR2X1"), Op::Nor);
        assert_eq!(Op::from_cell_type("INVX1"), Op::Not);
        assert_eq!(Op::from_cell_type("XNOR2"), Op::Xnor);
        assert_eq!(Op::from_cell_type("$_MUX_"), Op::Mux);
        assert_eq!(Op::from_cell_type("AOI21"), Op::Cell);
    }
}
