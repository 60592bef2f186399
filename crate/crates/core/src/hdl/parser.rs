// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the supported Verilog subset.
//!
//! Anything outside the subset (`initial`, `generate`, functions, tasks,
//! delays, loops, system calls) is rejected with
//! [`FrontendError::UnsupportedConstruct`] rather than skipped.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{lex, Token, TokenKind};
use super::preprocess::SourceUnit;
use super::FrontendError;

const UNSUPPORTED_ITEMS: &[&str] = &[
    "initial",
    "generate",
    "genvar",
    "function",
    "task",
    "specify",
    "defparam",
    "real",
    "realtime",
    "time",
    "event",
    "for",
    "primitive",
    "table",
    "config",
    "supply0",
    "supply1",
    "tri0",
    "tri1",
    "wand",
    "wor",
    "trireg",
];

const UNSUPPORTED_STMTS: &[&str] =
    &["for", "while", "repeat", "forever", "wait", "disable", "fork", "force", "release", "deassign", "assign"];

const GATES: &[&str] = &["and", "or", "nand", "nor", "xor", "xnor", "not", "buf"];

/// Parses a preprocessed unit into a [`DesignAst`].
pub fn parse(unit: &SourceUnit) -> Result<DesignAst, FrontendError> {
    let tokens = lex(&unit.text).map_err(|e| {
        let (file, line) = locate(unit, e.line);
        FrontendError::Syntax { file, line, column: e.column, message: e.message }
    })?;
    let mut parser = Parser { tokens, pos: 0, unit, used: Vec::new() };
    let mut design = parser.design()?;
    design.aliases = unit.renames.iter().map(|r| (r.sanitized.clone(), r.original.clone())).collect();
    Ok(design)
}

fn locate(unit: &SourceUnit, line: usize) -> (String, usize) {
    unit.locate(line).map(|(f, l)| (f.to_string(), l)).unwrap_or_else(|| ("<unit>".to_string(), line))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    unit: &'a SourceUnit,
    /// Identifiers read inside the current module with their token line.
    used: Vec<(String, usize)>,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser<'_> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), TokenKind::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, message: impl Into<String>) -> FrontendError {
        let tok = &self.tokens[self.pos];
        let (file, line) = locate(self.unit, tok.line);
        FrontendError::Syntax { file, line, column: tok.column, message: message.into() }
    }

    fn unsupported(&self, construct: impl Into<String>) -> FrontendError {
        let (file, line) = locate(self.unit, self.tokens[self.pos].line);
        FrontendError::UnsupportedConstruct { construct: construct.into(), file, line }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Ident(name) if !name.starts_with('$') => {
                self.bump();
                Ok(name)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    fn design(&mut self) -> PResult<DesignAst> {
        let mut modules = Vec::new();
        loop {
            match self.peek().clone() {
                TokenKind::Eof => break,
                TokenKind::Ident(kw) if kw == "module" || kw == "macromodule" => {
                    self.bump();
                    modules.push(self.module()?);
                }
                TokenKind::Ident(kw) if UNSUPPORTED_ITEMS.contains(&kw.as_str()) => {
                    return Err(self.unsupported(kw));
                }
                other => return Err(self.error(format!("expected `module`, found {other}"))),
            }
        }
        Ok(DesignAst { modules, aliases: Default::default() })
    }

    fn module(&mut self) -> PResult<Module> {
        self.used.clear();
        let header_line = self.tokens[self.pos].line;
        let name = self.ident()?;
        let mut header_params = Vec::new();
        if self.eat_sym("#") {
            self.expect_sym("(")?;
            header_params = self.header_params()?;
            self.expect_sym(")")?;
        }
        let mut ports = PortList::Names(Vec::new());
        if self.eat_sym("(") {
            ports = self.port_list()?;
            self.expect_sym(")")?;
        }
        self.expect_sym(";")?;
        let mut items = Vec::new();
        while !self.eat_kw("endmodule") {
            if matches!(self.peek(), TokenKind::Eof) {
                return Err(self.error(format!("missing `endmodule` for module `{name}`")));
            }
            if self.eat_sym(";") {
                continue;
            }
            items.push(self.item()?);
        }
        let module = Module { name, header_params, ports, items };
        self.check_declared(&module, header_line)?;
        Ok(module)
    }

    fn check_declared(&self, module: &Module, header_line: usize) -> PResult<()> {
        let mut declared: HashSet<&str> = HashSet::new();
        for p in &module.header_params {
            declared.extend(p.assigns.iter().map(|(n, _)| n.as_str()));
        }
        match &module.ports {
            PortList::Names(names) => declared.extend(names.iter().map(String::as_str)),
            PortList::Ansi(decls) => declared.extend(decls.iter().flat_map(|d| d.names.iter().map(String::as_str))),
        }
        for item in &module.items {
            match item {
                ModuleItem::Port(d) => declared.extend(d.names.iter().map(String::as_str)),
                ModuleItem::Net(d) => declared.extend(d.names.iter().map(|(n, _, _)| n.as_str())),
                ModuleItem::Param(d) => declared.extend(d.assigns.iter().map(|(n, _)| n.as_str())),
                _ => {}
            }
        }
        if let PortList::Names(names) = &module.ports {
            let directed: HashSet<&str> = module
                .items
                .iter()
                .filter_map(|i| match i {
                    ModuleItem::Port(d) => Some(d.names.iter().map(String::as_str)),
                    _ => None,
                })
                .flatten()
                .collect();
            if let Some(missing) = names.iter().find(|n| !directed.contains(n.as_str())) {
                let (file, line) = locate(self.unit, header_line);
                return Err(FrontendError::Syntax {
                    file,
                    line,
                    column: 1,
                    message: format!("port `{missing}` of module `{}` has no direction declaration", module.name),
                });
            }
        }
        for (name, line) in &self.used {
            if !declared.contains(name.as_str()) {
                let (file, line) = locate(self.unit, *line);
                return Err(FrontendError::UndeclaredIdentifier {
                    name: name.clone(),
                    module: module.name.clone(),
                    file,
                    line,
                });
            }
        }
        Ok(())
    }

    fn header_params(&mut self) -> PResult<Vec<ParamDecl>> {
        let mut decls: Vec<ParamDecl> = Vec::new();
        if self.is_sym(")") {
            return Ok(decls);
        }
        loop {
            let keyword = if self.eat_kw("parameter") {
                Some(false)
            } else if self.eat_kw("localparam") {
                Some(true)
            } else {
                None
            };
            if keyword.is_some() || decls.is_empty() {
                self.eat_kw("integer");
                let range = self.opt_range()?;
                decls.push(ParamDecl { local: keyword.unwrap_or(false), range, assigns: Vec::new() });
            }
            let name = self.ident()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            decls.last_mut().unwrap().assigns.push((name, value));
            if !self.eat_sym(",") {
                return Ok(decls);
            }
        }
    }

    fn direction(&mut self) -> Option<Direction> {
        let dir = match self.peek() {
            TokenKind::Ident(k) if k == "input" => Direction::Input,
            TokenKind::Ident(k) if k == "output" => Direction::Output,
            TokenKind::Ident(k) if k == "inout" => Direction::Inout,
            _ => return None,
        };
        self.bump();
        Some(dir)
    }

    fn net_type(&mut self) -> Option<NetType> {
        let net = match self.peek() {
            TokenKind::Ident(k) if k == "wire" || k == "tri" => NetType::Wire,
            TokenKind::Ident(k) if k == "reg" => NetType::Reg,
            TokenKind::Ident(k) if k == "integer" => NetType::Integer,
            _ => return None,
        };
        self.bump();
        Some(net)
    }

    fn port_list(&mut self) -> PResult<PortList> {
        if self.is_sym(")") {
            return Ok(PortList::Names(Vec::new()));
        }
        if !matches!(self.peek(), TokenKind::Ident(k) if k == "input" || k == "output" || k == "inout") {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            return Ok(PortList::Names(names));
        }
        let mut decls: Vec<PortDecl> = Vec::new();
        loop {
            if let Some(direction) = self.direction() {
                let net = self.net_type();
                let signed = self.eat_kw("signed");
                let range = self.opt_range()?;
                decls.push(PortDecl { direction, net, signed, range, names: Vec::new() });
            } else if decls.is_empty() {
                return Err(self.error("expected port direction"));
            }
            let name = self.ident()?;
            decls.last_mut().unwrap().names.push(name);
            if !self.eat_sym(",") {
                return Ok(PortList::Ansi(decls));
            }
        }
    }

    fn opt_range(&mut self) -> PResult<Option<Range>> {
        if !self.eat_sym("[") {
            return Ok(None);
        }
        let msb = self.expr()?;
        self.expect_sym(":")?;
        let lsb = self.expr()?;
        self.expect_sym("]")?;
        Ok(Some(Range { msb, lsb }))
    }

    fn item(&mut self) -> PResult<ModuleItem> {
        let kw = match self.peek().clone() {
            TokenKind::Ident(kw) => kw,
            other => return Err(self.error(format!("expected module item, found {other}"))),
        };
        if UNSUPPORTED_ITEMS.contains(&kw.as_str()) {
            return Err(self.unsupported(format!("`{kw}`")));
        }
        if let Some(direction) = self.direction() {
            let net = self.net_type();
            let signed = self.eat_kw("signed");
            let range = self.opt_range()?;
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(";")?;
            return Ok(ModuleItem::Port(PortDecl { direction, net, signed, range, names }));
        }
        if let Some(net) = self.net_type() {
            let signed = self.eat_kw("signed");
            let range = self.opt_range()?;
            let mut names = Vec::new();
            loop {
                let name = self.ident()?;
                let dims = self.opt_range()?;
                let init = if self.eat_sym("=") { Some(self.expr()?) } else { None };
                names.push((name, dims, init));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(";")?;
            return Ok(ModuleItem::Net(NetDecl { net, signed, range, names }));
        }
        match kw.as_str() {
            "parameter" | "localparam" => {
                self.bump();
                self.eat_kw("integer");
                let range = self.opt_range()?;
                let mut assigns = Vec::new();
                loop {
                    let name = self.ident()?;
                    self.expect_sym("=")?;
                    assigns.push((name, self.expr()?));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
                Ok(ModuleItem::Param(ParamDecl { local: kw == "localparam", range, assigns }))
            }
            "assign" => {
                self.bump();
                if self.is_sym("#") {
                    return Err(self.unsupported("delay on continuous assignment"));
                }
                let mut pairs = Vec::new();
                loop {
                    let lhs = self.lvalue()?;
                    self.expect_sym("=")?;
                    pairs.push((lhs, self.expr()?));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
                Ok(ModuleItem::Assign(pairs))
            }
            "always" => {
                self.bump();
                if !self.eat_sym("@") {
                    return Err(self.unsupported("`always` without event control"));
                }
                let sensitivity = self.sensitivity()?;
                let body = self.stmt()?;
                Ok(ModuleItem::Always(Always { sensitivity, body }))
            }
            g if GATES.contains(&g) => {
                self.bump();
                if self.is_sym("#") {
                    return Err(self.unsupported("gate delay"));
                }
                if self.is_sym("(")
                    && matches!(self.peek_at(1), TokenKind::Ident(s) if s.starts_with("strong") || s.starts_with("weak") || s.starts_with("pull"))
                {
                    return Err(self.unsupported("drive strength"));
                }
                let mut instances = Vec::new();
                loop {
                    let name = if matches!(self.peek(), TokenKind::Ident(_)) { Some(self.ident()?) } else { None };
                    self.expect_sym("(")?;
                    let mut terms = vec![self.expr()?];
                    while self.eat_sym(",") {
                        terms.push(self.expr()?);
                    }
                    self.expect_sym(")")?;
                    if terms.len() < 2 {
                        return Err(self.error(format!("gate `{g}` needs an output and at least one input")));
                    }
                    instances.push((name, terms));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
                Ok(ModuleItem::Gate(GateInst { kind: kw, instances }))
            }
            _ if kw.starts_with('$') => Err(self.unsupported(format!("system task `{kw}`"))),
            _ => self.instance(),
        }
    }

    fn instance(&mut self) -> PResult<ModuleItem> {
        let module = self.ident()?;
        let mut params = Connections::Positional(Vec::new());
        if self.eat_sym("#") {
            self.expect_sym("(")?;
            params = self.connections()?;
            self.expect_sym(")")?;
        }
        let name = self.ident()?;
        if self.is_sym("[") {
            return Err(self.unsupported("instance array"));
        }
        self.expect_sym("(")?;
        let ports = self.connections()?;
        self.expect_sym(")")?;
        if self.is_sym(",") {
            return Err(self.unsupported("multiple instances in one statement"));
        }
        self.expect_sym(";")?;
        Ok(ModuleItem::Instance(Instance { module, params, name, ports }))
    }

    fn connections(&mut self) -> PResult<Connections> {
        if self.is_sym(")") {
            return Ok(Connections::Positional(Vec::new()));
        }
        if self.is_sym(".") {
            let mut named = Vec::new();
            loop {
                self.expect_sym(".")?;
                let port = self.ident()?;
                self.expect_sym("(")?;
                let expr = if self.is_sym(")") { None } else { Some(self.expr()?) };
                self.expect_sym(")")?;
                named.push((port, expr));
                if !self.eat_sym(",") {
                    return Ok(Connections::Named(named));
                }
            }
        }
        let mut positional = Vec::new();
        loop {
            let expr = if self.is_sym(",") || self.is_sym(")") { None } else { Some(self.expr()?) };
            positional.push(expr);
            if !self.eat_sym(",") {
                return Ok(Connections::Positional(positional));
            }
        }
    }

    fn sensitivity(&mut self) -> PResult<Sensitivity> {
        if self.eat_sym("*") {
            return Ok(Sensitivity::Star);
        }
        self.expect_sym("(")?;
        if self.eat_sym("*") {
            self.expect_sym(")")?;
            return Ok(Sensitivity::Star);
        }
        let mut list = Vec::new();
        loop {
            let edge = if self.eat_kw("posedge") {
                Edge::Posedge
            } else if self.eat_kw("negedge") {
                Edge::Negedge
            } else {
                Edge::Level
            };
            list.push((edge, self.expr()?));
            if !(self.eat_kw("or") || self.eat_sym(",")) {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(Sensitivity::List(list))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        if self.eat_sym(";") {
            return Ok(Stmt::Null);
        }
        if self.is_sym("#") {
            return Err(self.unsupported("delay control"));
        }
        if self.is_sym("@") {
            return Err(self.unsupported("nested event control"));
        }
        if self.is_sym("{") {
            return self.assignment();
        }
        let kw = match self.peek().clone() {
            TokenKind::Ident(kw) => kw,
            other => return Err(self.error(format!("expected statement, found {other}"))),
        };
        if kw.starts_with('$') {
            return Err(self.unsupported(format!("system task `{kw}`")));
        }
        if UNSUPPORTED_STMTS.contains(&kw.as_str()) {
            return Err(self.unsupported(format!("`{kw}` statement")));
        }
        match kw.as_str() {
            "begin" => {
                self.bump();
                let label = if self.eat_sym(":") { Some(self.ident()?) } else { None };
                let mut stmts = Vec::new();
                while !self.eat_kw("end") {
                    if matches!(self.peek(), TokenKind::Eof) {
                        return Err(self.error("missing `end`"));
                    }
                    stmts.push(self.stmt()?);
                }
                Ok(Stmt::Block { label, stmts })
            }
            "if" => {
                self.bump();
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                let then = Box::new(self.stmt()?);
                let otherwise = if self.eat_kw("else") { Some(Box::new(self.stmt()?)) } else { None };
                Ok(Stmt::If { cond, then, otherwise })
            }
            "case" | "casez" | "casex" => {
                self.bump();
                let kind = match kw.as_str() {
                    "case" => CaseKind::Case,
                    "casez" => CaseKind::Casez,
                    _ => CaseKind::Casex,
                };
                self.expect_sym("(")?;
                let expr = self.expr()?;
                self.expect_sym(")")?;
                let mut items = Vec::new();
                while !self.eat_kw("endcase") {
                    if matches!(self.peek(), TokenKind::Eof) {
                        return Err(self.error("missing `endcase`"));
                    }
                    let mut labels = Vec::new();
                    if self.eat_kw("default") {
                        self.eat_sym(":");
                    } else {
                        labels.push(self.expr()?);
                        while self.eat_sym(",") {
                            labels.push(self.expr()?);
                        }
                        self.expect_sym(":")?;
                    }
                    let body = self.stmt()?;
                    items.push(CaseItem { labels, body });
                }
                Ok(Stmt::Case { kind, expr, items })
            }
            _ => self.assignment(),
        }
    }

    fn assignment(&mut self) -> PResult<Stmt> {
        let lhs = self.lvalue()?;
        let blocking = if self.eat_sym("=") {
            true
        } else if self.eat_sym("<=") {
            false
        } else {
            return Err(self.error(format!("expected `=` or `<=`, found {}", self.peek())));
        };
        if self.is_sym("#") || self.is_sym("@") {
            return Err(self.unsupported("intra-assignment timing control"));
        }
        let rhs = self.expr()?;
        self.expect_sym(";")?;
        Ok(if blocking { Stmt::Blocking { lhs, rhs } } else { Stmt::NonBlocking { lhs, rhs } })
    }

    fn lvalue(&mut self) -> PResult<Expr> {
        if self.eat_sym("{") {
            let mut items = vec![self.lvalue()?];
            while self.eat_sym(",") {
                items.push(self.lvalue()?);
            }
            self.expect_sym("}")?;
            return Ok(Expr::Concat(items));
        }
        let line = self.tokens[self.pos].line;
        let name = self.ident()?;
        self.used.push((name.clone(), line));
        let selects = self.selects()?;
        Ok(if selects.is_empty() { Expr::Ident(name) } else { Expr::Select(name, selects) })
    }

    fn selects(&mut self) -> PResult<Vec<Select>> {
        let mut out = Vec::new();
        while self.eat_sym("[") {
            let first = self.expr()?;
            let sel = if self.eat_sym(":") {
                Select::Range(Box::new(first), Box::new(self.expr()?))
            } else if self.eat_sym("+:") {
                Select::Indexed { base: Box::new(first), width: Box::new(self.expr()?), up: true }
            } else if self.eat_sym("-:") {
                Select::Indexed { base: Box::new(first), width: Box::new(self.expr()?), up: false }
            } else {
                Select::Bit(Box::new(first))
            };
            self.expect_sym("]")?;
            out.push(sel);
        }
        Ok(out)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat_sym("?") {
            let then = self.expr()?;
            self.expect_sym(":")?;
            let otherwise = self.expr()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(then), Box::new(otherwise)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = match self.peek() {
            TokenKind::Sym(s) => BinaryOp::from_symbol(s).filter(|op| op.precedence() > min_prec),
            _ => None,
        } {
            self.bump();
            let rhs = self.binary(op.precedence())?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if let TokenKind::Sym(s) = self.peek() {
            if let Some(op) = UnaryOp::from_symbol(s) {
                self.bump();
                let operand = self.unary()?;
                return Ok(Expr::Unary(op, Box::new(operand)));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.tokens[self.pos].clone();
        match tok.kind {
            TokenKind::Number(n) => {
                self.bump();
                Ok(Expr::Number(n))
            }
            TokenKind::Ident(name) => {
                if name.starts_with('$') {
                    return Err(self.unsupported(format!("system function `{name}`")));
                }
                self.bump();
                if self.is_sym("(") {
                    return Err(self.unsupported(format!("function call `{name}`")));
                }
                self.used.push((name.clone(), tok.line));
                let selects = self.selects()?;
                Ok(if selects.is_empty() { Expr::Ident(name) } else { Expr::Select(name, selects) })
            }
            TokenKind::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            TokenKind::Sym("{") => {
                self.bump();
                let first = self.expr()?;
                if self.eat_sym("{") {
                    let mut items = vec![self.expr()?];
                    while self.eat_sym(",") {
                        items.push(self.expr()?);
                    }
                    self.expect_sym("}")?;
                    self.expect_sym("}")?;
                    return Ok(Expr::Repeat(Box::new(first), items));
                }
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym("}")?;
                Ok(Expr::Concat(items))
            }
            TokenKind::Str(_) => Err(self.unsupported("string literal")),
            other => Err(self.error(format!("expected expression, found {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hdl::preprocess::{preprocess, SourceFile};
    use crate::node::Dialect;

    fn parse_str(src: &str) -> Result<DesignAst, FrontendError> {
        parse(&preprocess(&[SourceFile::new("t.v", src)], Dialect::Rtl)?)
    }

    #[test]
    fn smallest_assign() {
        let ast = parse_str("module m(input a, input b, output y);\nassign y = a & b;\nendmodule\n").unwrap();
        let m = &ast.modules[0];
        assert_eq!(m.items.len(), 1);
        assert_eq!(
            m.items[0],
            ModuleItem::Assign(vec![(
                Expr::ident("y"),
                Expr::binary(BinaryOp::And, Expr::ident("a"), Expr::ident("b"))
            )])
        );
    }

    #[test]
    fn trigger_counter() {
        let src = "module trig(input clk, input en, output trigger);\n\
                   reg [15:0] cnt;\n\
                   always @(posedge clk) if (en) cnt <= cnt + 1;\n\
                   assign trigger = (cnt == 16'hffff);\n\
                   endmodule\n";
        let ast = parse_str(src).unwrap();
        let always: Vec<_> = ast.modules[0]
            .items
            .iter()
            .filter_map(|i| if let ModuleItem::Always(a) = i { Some(a) } else { None })
            .collect();
        assert_eq!(always.len(), 1);
        assert!(always[0].is_clocked());
        let Stmt::If { then, otherwise, .. } = &always[0].body else { panic!("expected if") };
        assert!(otherwise.is_none());
        assert!(matches!(**then, Stmt::NonBlocking { .. }));
    }

    #[test]
    fn primitive_gate() {
        let ast = parse_str("module m(input a, input b, output y);\nand g1 (y, a, b);\nendmodule\n").unwrap();
        let ModuleItem::Gate(g) = &ast.modules[0].items[0] else { panic!() };
        assert_eq!(g.kind, "and");
        assert_eq!(g.instances[0].0.as_deref(), Some("g1"));
        assert_eq!(g.instances[0].1, vec![Expr::ident("y"), Expr::ident("a"), Expr::ident("b")]);
    }

    #[test]
    fn precedence() {
        let ast = parse_str("module m(input a, b, c, output y);\nassign y = a | b & c ^ a;\nendmodule\n").unwrap();
        let ModuleItem::Assign(pairs) = &ast.modules[0].items[0] else { panic!() };
        let expected = Expr::binary(
            BinaryOp::Or,
            Expr::ident("a"),
            Expr::binary(
                BinaryOp::Xor,
                Expr::binary(BinaryOp::And, Expr::ident("b"), Expr::ident("c")),
                Expr::ident("a"),
            ),
        );
        assert_eq!(pairs[0].1, expected);
    }

    #[test]
    fn unsupported_constructs_are_named() {
        let err = parse_str("module m(output reg y);\ninitial y = 0;\nendmodule\n").unwrap_err();
        assert!(
            matches!(err, FrontendError::UnsupportedConstruct { ref construct, line: 2, .. } if construct.contains("initial"))
        );
        let err = parse_str("module m(input a, output y);\ngenerate\nendgenerate\nendmodule\n").unwrap_err();
        assert!(matches!(err, FrontendError::UnsupportedConstruct { .. }));
        let err = parse_str("module m(input a, output reg y);\nalways @(a) #1 y = a;\nendmodule\n").unwrap_err();
        assert!(
            matches!(err, FrontendError::UnsupportedConstruct { ref construct, .. } if construct.contains("delay"))
        );
        let err = parse_str("module m(input a, output y);\nassign y = f(a);\nendmodule\n").unwrap_err();
        assert!(matches!(err, FrontendError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn syntax_errors_carry_file_positions() {
        let files = [
            SourceFile::new("top.v", "module top(input a, output y);\nsub u(.i(a), .o(y));\nendmodule\n"),
            SourceFile::new("sub.v", "module sub(input i, output o);\nassign o = ~ ;\nendmodule\n"),
        ];
        let err = parse(&preprocess(&files, Dialect::Rtl).unwrap()).unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { ref file, line: 2, .. } if file == "sub.v"), "{err:?}");
    }

    #[test]
    fn undeclared_identifiers_rejected() {
        let err = parse_str("module m(input a, output y);\nassign y = a & q;\nendmodule\n").unwrap_err();
        assert!(matches!(err, FrontendError::UndeclaredIdentifier { ref name, .. } if name == "q"));
    }

    #[test]
    fn non_ansi_and_case() {
        let src = "module m(sel, a, b, y);\ninput [1:0] sel; input a, b; output reg y;\n\
                   always @* begin : pick\n case (sel)\n 2'b00, 2'b11: y = a;\n default: y = b;\n endcase\n end\nendmodule\n";
        let ast = parse_str(src).unwrap();
        assert!(matches!(ast.modules[0].ports, PortList::Names(ref n) if n.len() == 4));
    }

    #[test]
    fn empty_module() {
        let ast = parse_str("module empty;\nendmodule\n").unwrap();
        assert!(ast.modules[0].items.is_empty());
    }
}
