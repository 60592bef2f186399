// SPDX-License-Identifier: Apache-2.0

//! Verilog pretty-printer. Output re-parses to a structurally identical AST.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

impl Display for DesignAst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for (i, m) in self.modules.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

fn join<T: Display>(items: &[T], sep: &str) -> String {
    let mut s = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            s.push_str(sep);
        }
        write!(s, "{item}").unwrap();
    }
    s
}

impl Display for Range {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.msb, self.lsb)
    }
}

fn opt_range(r: &Option<Range>) -> String {
    r.as_ref().map(|r| format!("{r} ")).unwrap_or_default()
}

impl Display for PortDecl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.direction.keyword())?;
        if let Some(net) = self.net {
            write!(f, "{} ", net.keyword())?;
        }
        if self.signed {
            f.write_str("signed ")?;
        }
        write!(f, "{}{}", opt_range(&self.range), self.names.join(", "))
    }
}

impl Display for ParamDecl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let kw = if self.local { "localparam" } else { "parameter" };
        let assigns: Vec<String> = self.assigns.iter().map(|(n, e)| format!("{n} = {e}")).collect();
        write!(f, "{kw} {}{}", opt_range(&self.range), assigns.join(", "))
    }
}

impl Display for Module {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "module {}", self.name)?;
        if !self.header_params.is_empty() {
            write!(f, " #({})", join(&self.header_params, ", "))?;
        }
        match &self.ports {
            PortList::Names(names) if names.is_empty() => {}
            PortList::Names(names) => write!(f, "({})", names.join(", "))?,
            PortList::Ansi(decls) => write!(f, "({})", join(decls, ", "))?,
        }
        writeln!(f, ";")?;
        for item in &self.items {
            write!(f, "{item}")?;
        }
        writeln!(f, "endmodule")
    }
}

fn connections(c: &Connections) -> String {
    let opt = |e: &Option<Expr>| e.as_ref().map(ToString::to_string).unwrap_or_default();
    match c {
        Connections::Positional(items) => items.iter().map(opt).collect::<Vec<_>>().join(", "),
        Connections::Named(items) => {
            items.iter().map(|(p, e)| format!(".{p}({})", opt(e))).collect::<Vec<_>>().join(", ")
        }
    }
}

impl Display for ModuleItem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ModuleItem::Port(p) => writeln!(f, "  {p};"),
            ModuleItem::Param(p) => writeln!(f, "  {p};"),
            ModuleItem::Net(n) => {
                write!(f, "  {} ", n.net.keyword())?;
                if n.signed {
                    f.write_str("signed ")?;
                }
                let names: Vec<String> = n
                    .names
                    .iter()
                    .map(|(name, dims, init)| {
                        let mut s = name.clone();
                        if let Some(d) = dims {
                            write!(s, " {d}").unwrap();
                        }
                        if let Some(e) = init {
                            write!(s, " = {e}").unwrap();
                        }
                        s
                    })
                    .collect();
                writeln!(f, "{}{};", opt_range(&n.range), names.join(", "))
            }
            ModuleItem::Assign(pairs) => {
                let parts: Vec<String> = pairs.iter().map(|(l, r)| format!("{l} = {r}")).collect();
                writeln!(f, "  assign {};", parts.join(", "))
            }
            ModuleItem::Always(a) => {
                let sens = match &a.sensitivity {
                    Sensitivity::Star => "*".to_string(),
                    Sensitivity::List(list) => {
                        let parts: Vec<String> = list
                            .iter()
                            .map(|(edge, e)| match edge {
                                Edge::Posedge => format!("posedge {e}"),
                                Edge::Negedge => format!("negedge {e}"),
                                Edge::Level => e.to_string(),
                            })
                            .collect();
                        format!("({})", parts.join(" or "))
                    }
                };
                writeln!(f, "  always @{sens}")?;
                write_stmt(f, &a.body, 2)
            }
            ModuleItem::Gate(g) => {
                let parts: Vec<String> = g
                    .instances
                    .iter()
                    .map(|(name, terms)| {
                        let name = name.as_ref().map(|n| format!("{n} ")).unwrap_or_default();
                        format!("{name}({})", join(terms, ", "))
                    })
                    .collect();
                writeln!(f, "  {} {};", g.kind, parts.join(", "))
            }
            ModuleItem::Instance(inst) => {
                write!(f, "  {} ", inst.module)?;
                let has_params = !matches!(&inst.params, Connections::Positional(p) if p.is_empty());
                if has_params {
                    write!(f, "#({}) ", connections(&inst.params))?;
                }
                writeln!(f, "{} ({});", inst.name, connections(&inst.ports))
            }
        }
    }
}

fn write_stmt(f: &mut Formatter<'_>, stmt: &Stmt, depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    match stmt {
        Stmt::Null => writeln!(f, "{pad};"),
        Stmt::Blocking { lhs, rhs } => writeln!(f, "{pad}{lhs} = {rhs};"),
        Stmt::NonBlocking { lhs, rhs } => writeln!(f, "{pad}{lhs} <= {rhs};"),
        Stmt::Block { label, stmts } => {
            match label {
                Some(l) => writeln!(f, "{pad}begin : {l}")?,
                None => writeln!(f, "{pad}begin")?,
            }
            for s in stmts {
                write_stmt(f, s, depth + 1)?;
            }
            writeln!(f, "{pad}end")
        }
        Stmt::If { cond, then, otherwise } => {
            writeln!(f, "{pad}if ({cond})")?;
            write_stmt(f, then, depth + 1)?;
            if let Some(o) = otherwise {
                writeln!(f, "{pad}else")?;
                write_stmt(f, o, depth + 1)?;
            }
            Ok(())
        }
        Stmt::Case { kind, expr, items } => {
            writeln!(f, "{pad}{} ({expr})", kind.keyword())?;
            for item in items {
                if item.labels.is_empty() {
                    writeln!(f, "{pad}  default:")?;
                } else {
                    writeln!(f, "{pad}  {}:", join(&item.labels, ", "))?;
                }
                write_stmt(f, &item.body, depth + 2)?;
            }
            writeln!(f, "{pad}endcase")
        }
    }
}

impl Display for Select {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Select::Bit(e) => write!(f, "[{e}]"),
            Select::Range(m, l) => write!(f, "[{m}:{l}]"),
            Select::Indexed { base, width, up } => write!(f, "[{base} {} {width}]", if *up { "+:" } else { "-:" }),
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Ident(n) => f.write_str(n),
            Expr::Number(n) => f.write_str(n),
            Expr::Unary(op, e) => write!(f, "{}({e})", op.symbol()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Ternary(c, a, b) => write!(f, "({c} ? {a} : {b})"),
            Expr::Select(n, sels) => {
                f.write_str(n)?;
                for s in sels {
                    write!(f, "{s}")?;
                }
                Ok(())
            }
            Expr::Concat(items) => write!(f, "{{{}}}", join(items, ", ")),
            Expr::Repeat(n, items) => write!(f, "{{{n}{{{}}}}}", join(items, ", ")),
        }
    }
}
