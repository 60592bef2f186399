// SPDX-License-Identifier: Apache-2.0

//! Abstract syntax tree for the supported Verilog subset.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DesignAst {
    pub modules: Vec<Module>,
    /// Sanitized identifier -> original spelling, carried over from preprocessing.
    pub aliases: BTreeMap<String, String>,
}

impl DesignAst {
    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// Name as it appeared in the source before sanitization.
    pub fn original_name<'a>(&'a self, name: &'a str) -> &'a str {
        self.aliases.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Modules that no other module instantiates.
    pub fn top_modules(&self) -> Vec<&Module> {
        let instantiated: Vec<&str> = self
            .modules
            .iter()
            .flat_map(|m| m.items.iter())
            .filter_map(|item| match item {
                ModuleItem::Instance(inst) => Some(inst.module.as_str()),
                _ => None,
            })
            .collect();
        self.modules.iter().filter(|m| !instantiated.contains(&m.name.as_str())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    /// `#(parameter ...)` header parameters.
    pub header_params: Vec<ParamDecl>,
    pub ports: PortList,
    pub items: Vec<ModuleItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortList {
    /// `module m(a, b);` with directions declared in the body.
    Names(Vec<String>),
    /// `module m(input a, output b);`
    Ansi(Vec<PortDecl>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetType {
    Wire,
    Reg,
    Integer,
}

impl NetType {
    pub fn keyword(self) -> &'static str {
        match self {
            NetType::Wire => "wire",
            NetType::Reg => "reg",
            NetType::Integer => "integer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Range {
    pub msb: Expr,
    pub lsb: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortDecl {
    pub direction: Direction,
    pub net: Option<NetType>,
    pub signed: bool,
    pub range: Option<Range>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetDecl {
    pub net: NetType,
    pub signed: bool,
    pub range: Option<Range>,
    /// Name, unpacked array dimension, and optional net initializer.
    pub names: Vec<(String, Option<Range>, Option<Expr>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub local: bool,
    pub range: Option<Range>,
    pub assigns: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleItem {
    Port(PortDecl),
    Net(NetDecl),
    Param(ParamDecl),
    Assign(Vec<(Expr, Expr)>),
    Always(Always),
    Gate(GateInst),
    Instance(Instance),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edge {
    Posedge,
    Negedge,
    Level,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sensitivity {
    Star,
    List(Vec<(Edge, Expr)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Always {
    pub sensitivity: Sensitivity,
    pub body: Stmt,
}

impl Always {
    pub fn is_clocked(&self) -> bool {
        matches!(&self.sensitivity, Sensitivity::List(l) if l.iter().any(|(e, _)| *e != Edge::Level))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateInst {
    /// Primitive keyword: and, or, nand, nor, xor, xnor, not, buf.
    pub kind: String,
    pub instances: Vec<(Option<String>, Vec<Expr>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connections {
    Positional(Vec<Option<Expr>>),
    Named(Vec<(String, Option<Expr>)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    /// Instantiated module or generic cell type.
    pub module: String,
    pub params: Connections,
    pub name: String,
    pub ports: Connections,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseKind {
    Case,
    Casez,
    Casex,
}

impl CaseKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            CaseKind::Case => "case",
            CaseKind::Casez => "casez",
            CaseKind::Casex => "casex",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseItem {
    /// Empty for `default`.
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Block { label: Option<String>, stmts: Vec<Stmt> },
    If { cond: Expr, then: Box<Stmt>, otherwise: Option<Box<Stmt>> },
    Case { kind: CaseKind, expr: Expr, items: Vec<CaseItem> },
    Blocking { lhs: Expr, rhs: Expr },
    NonBlocking { lhs: Expr, rhs: Expr },
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Plus,
    Minus,
    Not,
    LogicNot,
    ReduceAnd,
    ReduceOr,
    ReduceXor,
    ReduceNand,
    ReduceNor,
    ReduceXnor,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Plus => "+",
            UnaryOp::Minus => "-",
            UnaryOp::Not => "~",
            UnaryOp::LogicNot => "!",
            UnaryOp::ReduceAnd => "&",
            UnaryOp::ReduceOr => "|",
            UnaryOp::ReduceXor => "^",
            UnaryOp::ReduceNand => "~&",
            UnaryOp::ReduceNor => "~|",
            UnaryOp::ReduceXnor => "~^",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "+" => UnaryOp::Plus,
            "-" => UnaryOp::Minus,
            "~" => UnaryOp::Not,
            "!" => UnaryOp::LogicNot,
            "&" => UnaryOp::ReduceAnd,
            "|" => UnaryOp::ReduceOr,
            "^" => UnaryOp::ReduceXor,
            "~&" => UnaryOp::ReduceNand,
            "~|" => UnaryOp::ReduceNor,
            "~^" | "^~" => UnaryOp::ReduceXnor,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Pow,
    Mul,
    Div,
    Mod,
    Add,
    Sub,
    Shl,
    Shr,
    AShl,
    AShr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    CaseEq,
    CaseNe,
    And,
    Xor,
    Xnor,
    Or,
    LogicAnd,
    LogicOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Pow => "**",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::AShl => "<<<",
            BinaryOp::AShr => ">>>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::CaseEq => "===",
            BinaryOp::CaseNe => "!==",
            BinaryOp::And => "&",
            BinaryOp::Xor => "^",
            BinaryOp::Xnor => "~^",
            BinaryOp::Or => "|",
            BinaryOp::LogicAnd => "&&",
            BinaryOp::LogicOr => "||",
        }
    }

    /// Binding power; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Pow => 12,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 11,
            BinaryOp::Add | BinaryOp::Sub => 10,
            BinaryOp::Shl | BinaryOp::Shr | BinaryOp::AShl | BinaryOp::AShr => 9,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 8,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::CaseEq | BinaryOp::CaseNe => 7,
            BinaryOp::And => 6,
            BinaryOp::Xor | BinaryOp::Xnor => 5,
            BinaryOp::Or => 4,
            BinaryOp::LogicAnd => 3,
            BinaryOp::LogicOr => 2,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "**" => BinaryOp::Pow,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "%" => BinaryOp::Mod,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "<<" => BinaryOp::Shl,
            ">>" => BinaryOp::Shr,
            "<<<" => BinaryOp::AShl,
            ">>>" => BinaryOp::AShr,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "===" => BinaryOp::CaseEq,
            "!==" => BinaryOp::CaseNe,
            "&" => BinaryOp::And,
            "^" => BinaryOp::Xor,
            "~^" | "^~" => BinaryOp::Xnor,
            "|" => BinaryOp::Or,
            "&&" => BinaryOp::LogicAnd,
            "||" => BinaryOp::LogicOr,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Select {
    Bit(Box<Expr>),
    Range(Box<Expr>, Box<Expr>),
    /// `base +: width` (`up`) or `base -: width`.
    Indexed {
        base: Box<Expr>,
        width: Box<Expr>,
        up: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(String),
    Number(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Selects apply left to right: `mem[i][3:0]`.
    Select(String, Vec<Select>),
    Concat(Vec<Expr>),
    Repeat(Box<Expr>, Vec<Expr>),
}

impl Expr {
    pub fn ident(name: &str) -> Self {
        Expr::Ident(name.to_string())
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Every identifier read by this expression, in traversal order.
    pub fn identifiers<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Ident(n) => out.push(n),
            Expr::Number(_) => {}
            Expr::Unary(_, e) => e.identifiers(out),
            Expr::Binary(_, a, b) => {
                a.identifiers(out);
                b.identifiers(out);
            }
            Expr::Ternary(c, a, b) => {
                c.identifiers(out);
                a.identifiers(out);
                b.identifiers(out);
            }
            Expr::Select(n, sels) => {
                out.push(n);
                for s in sels {
                    match s {
                        Select::Bit(e) => e.identifiers(out),
                        Select::Range(a, b) => {
                            a.identifiers(out);
                            b.identifiers(out);
                        }
                        Select::Indexed { base, width, .. } => {
                            base.identifiers(out);
                            width.identifiers(out);
                        }
                    }
                }
            }
            Expr::Concat(items) => items.iter().for_each(|e| e.identifiers(out)),
            Expr::Repeat(n, items) => {
                n.identifiers(out);
                items.iter().for_each(|e| e.identifiers(out));
            }
        }
    }
}
