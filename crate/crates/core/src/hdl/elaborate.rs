// SPDX-License-Identifier: Apache-2.0

//! Flattens the top module: instances are inlined with `inst.` prefixes,
//! parameters are substituted, and every assignment is reduced to a driver
//! expression tree per signal.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;

use crate::node::Op;

use super::ast::*;
use super::FrontendError;

/// Resolved data-flow expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DTree {
    Signal(String),
    Const(String),
    Op(Op, Vec<DTree>),
    Branch { cond: Box<DTree>, then: Option<Box<DTree>>, otherwise: Option<Box<DTree>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalClass {
    Input,
    Output,
    Inout,
    Wire,
    Reg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalDecl {
    pub name: String,
    pub class: SignalClass,
    /// Port of the top module (not of an inlined instance).
    pub top_port: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Driver {
    pub tree: DTree,
    /// Assignment targets a bit or part select of the signal.
    pub partial: bool,
}

/// Flattened view of a design.
#[derive(Debug, Clone, Default)]
pub struct Elaborated {
    pub top: Option<String>,
    pub signals: IndexMap<String, SignalDecl>,
    pub drivers: HashMap<String, Vec<Driver>>,
}

impl Elaborated {
    pub fn drivers_of(&self, name: &str) -> &[Driver] {
        self.drivers.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

const MAX_DEPTH: usize = 64;

pub fn elaborate(ast: &DesignAst) -> Result<Elaborated, FrontendError> {
    let mut out = Elaborated::default();
    if ast.modules.is_empty() {
        return Ok(out);
    }
    let tops = ast.top_modules();
    if tops.len() != 1 {
        return Err(FrontendError::TopModule(tops.iter().map(|m| m.name.clone()).collect()));
    }
    let top = tops[0];
    out.top = Some(top.name.clone());
    let mut stack = vec![top.name.clone()];
    Scope::new(ast, top, String::new(), HashMap::new())?.run(&mut out, &mut stack)?;
    Ok(out)
}

struct Scope<'a> {
    ast: &'a DesignAst,
    module: &'a Module,
    prefix: String,
    params: HashMap<String, i64>,
    /// Parameters whose value could not be folded; kept symbolic.
    opaque_params: HashSet<String>,
}

impl<'a> Scope<'a> {
    fn new(
        ast: &'a DesignAst,
        module: &'a Module,
        prefix: String,
        overrides: HashMap<String, Option<i64>>,
    ) -> Result<Self, FrontendError> {
        let mut scope = Scope { ast, module, prefix, params: HashMap::new(), opaque_params: HashSet::new() };
        let header = module.header_params.iter();
        let body = module.items.iter().filter_map(|i| match i {
            ModuleItem::Param(p) => Some(p),
            _ => None,
        });
        for decl in header.chain(body) {
            for (name, expr) in &decl.assigns {
                let value = match overrides.get(name) {
                    Some(v) if !decl.local => *v,
                    _ => eval_const(expr, &scope.params),
                };
                match value {
                    Some(v) => {
                        scope.params.insert(name.clone(), v);
                    }
                    None => {
                        scope.opaque_params.insert(name.clone());
                    }
                }
            }
        }
        Ok(scope)
    }

    fn is_param(&self, name: &str) -> bool {
        self.params.contains_key(name) || self.opaque_params.contains(name)
    }

    fn name(&self, local: &str) -> String {
        format!("{}{local}", self.prefix)
    }

    fn declare(&self, out: &mut Elaborated, local: &str, class: SignalClass) {
        let name = self.name(local);
        let top_port =
            self.prefix.is_empty() && matches!(class, SignalClass::Input | SignalClass::Output | SignalClass::Inout);
        match out.signals.get_mut(&name) {
            // `output y; reg y;` keeps the port class
            Some(existing) => {
                if matches!(existing.class, SignalClass::Wire | SignalClass::Reg) {
                    existing.class = class;
                    existing.top_port = top_port;
                }
            }
            None => {
                out.signals.insert(name.clone(), SignalDecl { name, class, top_port });
            }
        }
    }

    fn port_direction(&self, port: &str) -> Option<Direction> {
        if let PortList::Ansi(decls) = &self.module.ports {
            if let Some(d) = decls.iter().find(|d| d.names.iter().any(|n| n == port)) {
                return Some(d.direction);
            }
        }
        self.module.items.iter().find_map(|i| match i {
            ModuleItem::Port(d) if d.names.iter().any(|n| n == port) => Some(d.direction),
            _ => None,
        })
    }

    fn port_names(&self) -> Vec<String> {
        match &self.module.ports {
            PortList::Names(n) => n.clone(),
            PortList::Ansi(decls) => decls.iter().flat_map(|d| d.names.iter().cloned()).collect(),
        }
    }

    fn run(&self, out: &mut Elaborated, stack: &mut Vec<String>) -> Result<(), FrontendError> {
        let dir_class = |d: Direction| match d {
            Direction::Input => SignalClass::Input,
            Direction::Output => SignalClass::Output,
            Direction::Inout => SignalClass::Inout,
        };
        if let PortList::Ansi(decls) = &self.module.ports {
            for d in decls {
                for n in &d.names {
                    self.declare(out, n, dir_class(d.direction));
                }
            }
        }
        for item in &self.module.items {
            match item {
                ModuleItem::Port(d) => {
                    for n in &d.names {
                        self.declare(out, n, dir_class(d.direction));
                    }
                }
                ModuleItem::Net(d) => {
                    let class = if d.net == NetType::Wire { SignalClass::Wire } else { SignalClass::Reg };
                    for (n, _, _) in &d.names {
                        self.declare(out, n, class);
                    }
                }
                _ => {}
            }
        }

        for item in &self.module.items {
            match item {
                ModuleItem::Net(d) => {
                    for (n, _, init) in &d.names {
                        if let Some(e) = init {
                            let tree = self.convert(e);
                            self.add_driver(out, &self.name(n), tree, false);
                        }
                    }
                }
                ModuleItem::Assign(pairs) => {
                    for (lhs, rhs) in pairs {
                        let tree = self.convert(rhs);
                        for (target, partial) in self.targets(lhs) {
                            self.add_driver(out, &target, tree.clone(), partial);
                        }
                    }
                }
                ModuleItem::Always(a) => {
                    let mut env = Env::default();
                    self.exec(&a.body, &mut env);
                    for (_, slot) in env.values {
                        if let Some(tree) = slot.tree {
                            self.add_driver(out, &slot.target, tree, slot.partial);
                        }
                    }
                }
                ModuleItem::Gate(g) => {
                    let op = Op::from_gate_keyword(&g.kind).expect("parser only accepts gate keywords");
                    for (_, terms) in &g.instances {
                        let (outs, ins) = if matches!(op, Op::Not | Op::Buf) {
                            terms.split_at(terms.len() - 1)
                        } else {
                            terms.split_at(1)
                        };
                        let tree = DTree::Op(op, ins.iter().map(|e| self.convert(e)).collect());
                        for o in outs {
                            for (target, partial) in self.targets(o) {
                                self.add_driver(out, &target, tree.clone(), partial);
                            }
                        }
                    }
                }
                ModuleItem::Instance(inst) => self.instance(out, inst, stack)?,
                ModuleItem::Port(_) | ModuleItem::Param(_) => {}
            }
        }
        Ok(())
    }

    fn instance(&self, out: &mut Elaborated, inst: &Instance, stack: &mut Vec<String>) -> Result<(), FrontendError> {
        let Some(child) = self.ast.module(&inst.module) else {
            return self.cell(out, inst);
        };
        if stack.contains(&child.name) || stack.len() >= MAX_DEPTH {
            return Err(FrontendError::Elaboration(format!(
                "recursive instantiation of `{}` via `{}`",
                child.name,
                stack.join(" -> ")
            )));
        }
        let mut overrides = HashMap::new();
        let child_param_names: Vec<&String> = child
            .header_params
            .iter()
            .chain(child.items.iter().filter_map(|i| match i {
                ModuleItem::Param(p) if !p.local => Some(p),
                _ => None,
            }))
            .flat_map(|p| p.assigns.iter().map(|(n, _)| n))
            .collect();
        match &inst.params {
            Connections::Named(list) => {
                for (name, e) in list {
                    if !child_param_names.contains(&name) {
                        return Err(FrontendError::Elaboration(format!(
                            "module `{}` has no parameter `{name}` (instance `{}`)",
                            child.name, inst.name
                        )));
                    }
                    if let Some(e) = e {
                        overrides.insert(name.clone(), eval_const(e, &self.params));
                    }
                }
            }
            Connections::Positional(list) => {
                for (i, e) in list.iter().enumerate() {
                    let Some(name) = child_param_names.get(i) else {
                        return Err(FrontendError::Elaboration(format!(
                            "too many parameter overrides for `{}` (instance `{}`)",
                            child.name, inst.name
                        )));
                    };
                    if let Some(e) = e {
                        overrides.insert((*name).clone(), eval_const(e, &self.params));
                    }
                }
            }
        }
        let prefix = format!("{}{}.", self.prefix, inst.name);
        let child_scope = Scope::new(self.ast, child, prefix, overrides)?;
        stack.push(child.name.clone());
        child_scope.run(out, stack)?;
        stack.pop();

        let ports = child_scope.port_names();
        let pairs: Vec<(String, &Expr)> = match &inst.ports {
            Connections::Named(list) => {
                let mut v = Vec::new();
                for (p, e) in list {
                    if !ports.contains(p) {
                        return Err(FrontendError::Elaboration(format!(
                            "module `{}` has no port `{p}` (instance `{}`)",
                            child.name, inst.name
                        )));
                    }
                    if let Some(e) = e {
                        v.push((p.clone(), e));
                    }
                }
                v
            }
            Connections::Positional(list) => {
                if list.len() > ports.len() {
                    return Err(FrontendError::Elaboration(format!(
                        "instance `{}` connects {} ports but `{}` has {}",
                        inst.name,
                        list.len(),
                        child.name,
                        ports.len()
                    )));
                }
                list.iter().zip(&ports).filter_map(|(e, p)| e.as_ref().map(|e| (p.clone(), e))).collect()
            }
        };
        for (port, expr) in pairs {
            let inner = child_scope.name(&port);
            match child_scope.port_direction(&port) {
                Some(Direction::Output) => {
                    for (target, partial) in self.targets(expr) {
                        self.add_driver(out, &target, DTree::Signal(inner.clone()), partial);
                    }
                }
                _ => {
                    let tree = self.convert(expr);
                    self.add_driver(out, &inner, tree, false);
                }
            }
        }
        Ok(())
    }

    /// Instance of a module not defined in the design: a generic library cell.
    fn cell(&self, out: &mut Elaborated, inst: &Instance) -> Result<(), FrontendError> {
        let op = Op::from_cell_type(self.ast.original_name(&inst.module));
        let (outputs, inputs): (Vec<&Expr>, Vec<&Expr>) = match &inst.ports {
            Connections::Named(list) => {
                let mut outs = Vec::new();
                let mut ins = Vec::new();
                for (port, e) in list {
                    let Some(e) = e else { continue };
                    if is_output_pin(port) {
                        outs.push(e);
                    } else {
                        ins.push(e);
                    }
                }
                (outs, ins)
            }
            Connections::Positional(list) => {
                let present: Vec<&Expr> = list.iter().flatten().collect();
                match present.split_first() {
                    Some((first, rest)) => (vec![*first], rest.to_vec()),
                    None => (Vec::new(), Vec::new()),
                }
            }
        };
        let tree = DTree::Op(op, inputs.iter().map(|e| self.convert(e)).collect());
        for o in outputs {
            for (target, partial) in self.targets(o) {
                self.add_driver(out, &target, tree.clone(), partial);
            }
        }
        Ok(())
    }

    fn add_driver(&self, out: &mut Elaborated, target: &str, tree: DTree, partial: bool) {
        out.drivers.entry(target.to_string()).or_default().push(Driver { tree, partial });
    }

    /// Signals written by an lvalue, with whether the write is partial.
    fn targets(&self, lhs: &Expr) -> Vec<(String, bool)> {
        match lhs {
            Expr::Ident(n) => vec![(self.name(n), false)],
            Expr::Select(n, _) => vec![(self.name(n), true)],
            Expr::Concat(items) => items.iter().flat_map(|e| self.targets(e)).collect(),
            _ => Vec::new(),
        }
    }

    fn const_value(&self, e: &Expr) -> Option<i64> {
        eval_const(e, &self.params)
    }

    fn convert(&self, e: &Expr) -> DTree {
        match e {
            Expr::Ident(n) => match self.params.get(n) {
                Some(v) => DTree::Const(v.to_string()),
                None if self.opaque_params.contains(n) => DTree::Const(n.clone()),
                None => DTree::Signal(self.name(n)),
            },
            Expr::Number(s) => DTree::Const(s.clone()),
            Expr::Unary(op, inner) => {
                let child = self.convert(inner);
                let op = match op {
                    UnaryOp::Plus => return child,
                    UnaryOp::Minus => Op::Neg,
                    UnaryOp::Not => Op::Not,
                    UnaryOp::LogicNot => Op::LogicNot,
                    UnaryOp::ReduceAnd => Op::ReduceAnd,
                    UnaryOp::ReduceOr => Op::ReduceOr,
                    UnaryOp::ReduceXor => Op::ReduceXor,
                    UnaryOp::ReduceNand => Op::ReduceNand,
                    UnaryOp::ReduceNor => Op::ReduceNor,
                    UnaryOp::ReduceXnor => Op::ReduceXnor,
                };
                DTree::Op(op, vec![child])
            }
            Expr::Binary(op, a, b) => DTree::Op(binary_op(*op), vec![self.convert(a), self.convert(b)]),
            Expr::Ternary(c, a, b) => DTree::Branch {
                cond: Box::new(self.convert(c)),
                then: Some(Box::new(self.convert(a))),
                otherwise: Some(Box::new(self.convert(b))),
            },
            Expr::Select(n, sels) => {
                let mut base =
                    if self.is_param(n) { self.convert(&Expr::Ident(n.clone())) } else { DTree::Signal(self.name(n)) };
                for sel in sels {
                    base = match sel {
                        Select::Bit(i) => match self.const_value(i) {
                            Some(v) => DTree::Op(
                                Op::PartSelect,
                                vec![base, DTree::Const(v.to_string()), DTree::Const(v.to_string())],
                            ),
                            None => DTree::Op(Op::Pointer, vec![base, self.convert(i)]),
                        },
                        Select::Range(m, l) => match (self.const_value(m), self.const_value(l)) {
                            (Some(m), Some(l)) => DTree::Op(
                                Op::PartSelect,
                                vec![base, DTree::Const(m.to_string()), DTree::Const(l.to_string())],
                            ),
                            _ => DTree::Op(Op::Pointer, vec![base, self.convert(m), self.convert(l)]),
                        },
                        Select::Indexed { base: start, width, up } => {
                            match (self.const_value(start), self.const_value(width)) {
                                (Some(s), Some(w)) => {
                                    let (msb, lsb) = if *up { (s + w - 1, s) } else { (s, s - w + 1) };
                                    DTree::Op(
                                        Op::PartSelect,
                                        vec![base, DTree::Const(msb.to_string()), DTree::Const(lsb.to_string())],
                                    )
                                }
                                _ => DTree::Op(Op::Pointer, vec![base, self.convert(start)]),
                            }
                        }
                    };
                }
                base
            }
            Expr::Concat(items) | Expr::Repeat(_, items) => {
                DTree::Op(Op::Concat, items.iter().map(|i| self.convert(i)).collect())
            }
        }
    }

    fn exec(&self, stmt: &Stmt, env: &mut Env) {
        match stmt {
            Stmt::Null => {}
            Stmt::Blocking { lhs, rhs } | Stmt::NonBlocking { lhs, rhs } => {
                let tree = self.convert(rhs);
                self.assign(lhs, &tree, env);
            }
            Stmt::Block { stmts, .. } => {
                for s in stmts {
                    self.exec(s, env);
                }
            }
            Stmt::If { cond, then, otherwise } => {
                let cond = self.convert(cond);
                let mut then_env = env.clone();
                then_env.assigned.clear();
                self.exec(then, &mut then_env);
                let mut else_env = env.clone();
                else_env.assigned.clear();
                if let Some(o) = otherwise {
                    self.exec(o, &mut else_env);
                }
                let mut keys: Vec<String> = then_env.assigned.clone();
                for k in &else_env.assigned {
                    if !keys.contains(k) {
                        keys.push(k.clone());
                    }
                }
                for key in keys {
                    let pick = |branch: &Env| -> Option<Box<DTree>> {
                        if branch.assigned.contains(&key) {
                            branch.values[&key].tree.clone().map(Box::new)
                        } else {
                            env.values.get(&key).and_then(|s| s.tree.clone()).map(Box::new)
                        }
                    };
                    let merged = DTree::Branch {
                        cond: Box::new(cond.clone()),
                        then: pick(&then_env),
                        otherwise: pick(&else_env),
                    };
                    let slot_src = if then_env.assigned.contains(&key) { &then_env } else { &else_env };
                    let slot = &slot_src.values[&key];
                    env.set(key, slot.target.clone(), slot.partial, merged);
                }
            }
            Stmt::Case { expr, items, .. } => {
                let chain = case_to_if(expr, items);
                if let Some(chain) = chain {
                    self.exec(&chain, env);
                }
            }
        }
    }

    fn assign(&self, lhs: &Expr, tree: &DTree, env: &mut Env) {
        match lhs {
            Expr::Concat(items) => {
                for item in items {
                    self.assign(item, tree, env);
                }
            }
            Expr::Ident(n) => env.set(n.clone(), self.name(n), false, tree.clone()),
            Expr::Select(n, _) => env.set(lhs.to_string(), self.name(n), true, tree.clone()),
            _ => {}
        }
    }
}

fn is_output_pin(port: &str) -> bool {
    matches!(port.to_ascii_uppercase().as_str(), "Y" | "Q" | "QN" | "Q_N" | "Z" | "ZN" | "O" | "OUT")
}

/// Lowers a case statement to an if/else chain; `default` ends the chain.
fn case_to_if(expr: &Expr, items: &[CaseItem]) -> Option<Stmt> {
    let default = items.iter().find(|i| i.labels.is_empty()).map(|i| i.body.clone());
    let mut acc = default;
    for item in items.iter().rev().filter(|i| !i.labels.is_empty()) {
        let cond = item
            .labels
            .iter()
            .map(|l| Expr::binary(BinaryOp::Eq, expr.clone(), l.clone()))
            .reduce(|a, b| Expr::binary(BinaryOp::LogicOr, a, b))
            .expect("non-default items have labels");
        acc = Some(Stmt::If { cond, then: Box::new(item.body.clone()), otherwise: acc.map(Box::new) });
    }
    acc
}

#[derive(Debug, Clone)]
struct Slot {
    target: String,
    partial: bool,
    tree: Option<DTree>,
}

#[derive(Debug, Clone, Default)]
struct Env {
    values: IndexMap<String, Slot>,
    assigned: Vec<String>,
}

impl Env {
    fn set(&mut self, key: String, target: String, partial: bool, tree: DTree) {
        if !self.assigned.contains(&key) {
            self.assigned.push(key.clone());
        }
        self.values.insert(key, Slot { target, partial, tree: Some(tree) });
    }
}

fn binary_op(op: BinaryOp) -> Op {
    match op {
        BinaryOp::Pow => Op::Pow,
        BinaryOp::Mul => Op::Mul,
        BinaryOp::Div => Op::Div,
        BinaryOp::Mod => Op::Mod,
        BinaryOp::Add => Op::Add,
        BinaryOp::Sub => Op::Sub,
        BinaryOp::Shl => Op::Shl,
        BinaryOp::Shr => Op::Shr,
        BinaryOp::AShl => Op::AShl,
        BinaryOp::AShr => Op::AShr,
        BinaryOp::Lt => Op::Lt,
        BinaryOp::Le => Op::Le,
        BinaryOp::Gt => Op::Gt,
        BinaryOp::Ge => Op::Ge,
        BinaryOp::Eq => Op::Eq,
        BinaryOp::Ne => Op::Ne,
        BinaryOp::CaseEq => Op::CaseEq,
        BinaryOp::CaseNe => Op::CaseNe,
        BinaryOp::And => Op::And,
        BinaryOp::Xor => Op::Xor,
        BinaryOp::Xnor => Op::Xnor,
        BinaryOp::Or => Op::Or,
        BinaryOp::LogicAnd => Op::LogicAnd,
        BinaryOp::LogicOr => Op::LogicOr,
    }
}

/// Value of an integer literal; `None` for literals containing x/z bits.
pub fn literal_value(lit: &str) -> Option<i64> {
    match lit.split_once('\'') {
        None => lit.parse().ok(),
        Some((_, rest)) => {
            let rest = rest.trim_start_matches('s');
            let (base, digits) = rest.split_at(1);
            let radix = match base {
                "b" => 2,
                "o" => 8,
                "d" => 10,
                "h" => 16,
                _ => return None,
            };
            u64::from_str_radix(digits, radix).ok().map(|v| v as i64)
        }
    }
}

/// Folds a constant expression over known parameter values.
pub fn eval_const(e: &Expr, params: &HashMap<String, i64>) -> Option<i64> {
    Some(match e {
        Expr::Number(n) => literal_value(n)?,
        Expr::Ident(n) => *params.get(n)?,
        Expr::Unary(UnaryOp::Minus, a) => eval_const(a, params)?.checked_neg()?,
        Expr::Unary(UnaryOp::Plus, a) => eval_const(a, params)?,
        Expr::Unary(UnaryOp::LogicNot, a) => (eval_const(a, params)? == 0) as i64,
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_const(a, params)?, eval_const(b, params)?);
            match op {
                BinaryOp::Add => a.checked_add(b)?,
                BinaryOp::Sub => a.checked_sub(b)?,
                BinaryOp::Mul => a.checked_mul(b)?,
                BinaryOp::Div => a.checked_div(b)?,
                BinaryOp::Mod => a.checked_rem(b)?,
                BinaryOp::Pow => a.checked_pow(u32::try_from(b).ok()?)?,
                BinaryOp::Shl | BinaryOp::AShl => a.checked_shl(u32::try_from(b).ok()?)?,
                BinaryOp::Shr | BinaryOp::AShr => a.checked_shr(u32::try_from(b).ok()?)?,
                BinaryOp::And => a & b,
                BinaryOp::Or => a | b,
                BinaryOp::Xor => a ^ b,
                BinaryOp::Lt => (a < b) as i64,
                BinaryOp::Le => (a <= b) as i64,
                BinaryOp::Gt => (a > b) as i64,
                BinaryOp::Ge => (a >= b) as i64,
                BinaryOp::Eq | BinaryOp::CaseEq => (a == b) as i64,
                BinaryOp::Ne | BinaryOp::CaseNe => (a != b) as i64,
                BinaryOp::LogicAnd => (a != 0 && b != 0) as i64,
                BinaryOp::LogicOr => (a != 0 || b != 0) as i64,
                BinaryOp::Xnor => return None,
            }
        }
        Expr::Ternary(c, a, b) => {
            if eval_const(c, params)? != 0 {
                eval_const(a, params)?
            } else {
                eval_const(b, params)?
            }
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_values() {
        assert_eq!(literal_value("12"), Some(12));
        assert_eq!(literal_value("8'hff"), Some(255));
        assert_eq!(literal_value("4'b1010"), Some(10));
        assert_eq!(literal_value("'d7"), Some(7));
        assert_eq!(literal_value("4'sd3"), Some(3));
        assert_eq!(literal_value("1'bx"), None);
    }
}
