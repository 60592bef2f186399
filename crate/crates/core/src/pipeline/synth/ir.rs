// SPDX-License-Identifier: Apache-2.0

//! Word-level design description shared by the RTL and netlist emitters.

use std::collections::HashMap;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Bin {
    And,
    Or,
    Xor,
    Add,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Expr {
    Sig(String),
    Const(u64, u32),
    Bin(Bin, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    /// One bit.
    Eq(Box<Expr>, Box<Expr>),
    /// `sel ? then : otherwise`.
    Mux(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Bit range of a named signal.
    Slice(String, u32, u32),
    /// Most significant part first.
    Concat(Vec<Expr>),
    Repl(u32, Box<Expr>),
}

pub(crate) fn sig(name: &str) -> Expr {
    Expr::Sig(name.to_string())
}

pub(crate) fn lit(value: u64, width: u32) -> Expr {
    Expr::Const(value & mask(width), width)
}

pub(crate) fn bin(op: Bin, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b))
}

pub(crate) fn not(a: Expr) -> Expr {
    Expr::Not(Box::new(a))
}

pub(crate) fn eq(a: Expr, b: Expr) -> Expr {
    Expr::Eq(Box::new(a), Box::new(b))
}

pub(crate) fn mux(sel: Expr, then: Expr, otherwise: Expr) -> Expr {
    Expr::Mux(Box::new(sel), Box::new(then), Box::new(otherwise))
}

pub(crate) fn bit(name: &str, i: u32) -> Expr {
    Expr::Slice(name.to_string(), i, i)
}

pub(crate) fn slice(name: &str, msb: u32, lsb: u32) -> Expr {
    Expr::Slice(name.to_string(), msb, lsb)
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Expr {
    pub(crate) fn width(&self, widths: &HashMap<String, u32>) -> u32 {
        match self {
            Expr::Sig(n) => widths[n],
            Expr::Const(_, w) => *w,
            Expr::Bin(_, a, b) | Expr::Mux(_, a, b) => a.width(widths).max(b.width(widths)),
            Expr::Not(a) => a.width(widths),
            Expr::Eq(..) => 1,
            Expr::Slice(_, msb, lsb) => msb - lsb + 1,
            Expr::Concat(parts) => parts.iter().map(|p| p.width(widths)).sum(),
            Expr::Repl(n, a) => n * a.width(widths),
        }
    }

    pub(crate) fn verilog(&self, widths: &HashMap<String, u32>) -> String {
        match self {
            Expr::Sig(n) => n.clone(),
            Expr::Const(v, w) => format!("{w}'d{v}"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    Bin::And => "&",
                    Bin::Or => "|",
                    Bin::Xor => "^",
                    Bin::Add => "+",
                };
                format!("({} {sym} {})", a.verilog(widths), b.verilog(widths))
            }
            Expr::Not(a) => format!("~{}", a.verilog(widths)),
            Expr::Eq(a, b) => format!("({} == {})", a.verilog(widths), b.verilog(widths)),
            Expr::Mux(s, t, e) => format!("({} ? {} : {})", s.verilog(widths), t.verilog(widths), e.verilog(widths)),
            Expr::Slice(n, _, _) if widths.get(n) == Some(&1) => n.clone(),
            Expr::Slice(n, msb, lsb) if msb == lsb => format!("{n}[{msb}]"),
            Expr::Slice(n, msb, lsb) => format!("{n}[{msb}:{lsb}]"),
            Expr::Concat(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.verilog(widths)).collect();
                format!("{{{}}}", inner.join(", "))
            }
            Expr::Repl(n, a) => format!("{{{n}{{{}}}}}", a.verilog(widths)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dir {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Port {
    pub name: String,
    pub dir: Dir,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ItemKind {
    /// Internal net with a continuous assignment.
    Wire { name: String, width: u32, expr: Expr },
    /// Continuous assignment to an output port.
    Drive { name: String, expr: Expr },
    /// Clocked register with synchronous reset to zero.
    Reg { name: String, width: u32, next: Expr, enable: Option<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Item {
    pub kind: ItemKind,
    /// Part of an inserted malicious region.
    pub inserted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Design {
    pub module: String,
    pub ports: Vec<Port>,
    pub items: Vec<Item>,
}

/// Generated source text and the 1-based lines belonging to inserted items.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Emitted {
    pub text: String,
    pub inserted_lines: Vec<usize>,
}

impl Emitted {
    pub(crate) fn region(&self) -> String {
        line_ranges(&self.inserted_lines)
    }
}

/// `3-5,9` style summary of sorted line numbers.
pub(crate) fn line_ranges(lines: &[usize]) -> String {
    let mut sorted = lines.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut parts = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i];
        let mut end = start;
        while i + 1 < sorted.len() && sorted[i + 1] == end + 1 {
            i += 1;
            end = sorted[i];
        }
        parts.push(if start == end { start.to_string() } else { format!("{start}-{end}") });
        i += 1;
    }
    parts.join(",")
}

pub(crate) struct Lines {
    pub text: String,
    pub count: usize,
    pub marked: Vec<usize>,
}

impl Lines {
    pub(crate) fn new() -> Self {
        Lines { text: String::new(), count: 0, marked: Vec::new() }
    }

    pub(crate) fn push(&mut self, line: &str, inserted: bool) {
        self.count += 1;
        if inserted {
            self.marked.push(self.count);
        }
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub(crate) fn finish(self) -> Emitted {
        Emitted { text: self.text, inserted_lines: self.marked }
    }
}

pub(crate) fn range(width: u32) -> String {
    if width > 1 {
        format!("[{}:0] ", width - 1)
    } else {
        String::new()
    }
}

impl Design {
    pub(crate) fn widths(&self) -> HashMap<String, u32> {
        let mut w: HashMap<String, u32> = self.ports.iter().map(|p| (p.name.clone(), p.width)).collect();
        for item in &self.items {
            match &item.kind {
                ItemKind::Wire { name, width, .. } | ItemKind::Reg { name, width, .. } => {
                    w.insert(name.clone(), *width);
                }
                ItemKind::Drive { .. } => {}
            }
        }
        w
    }

    pub(crate) fn header(&self, out: &mut Lines) {
        let names: Vec<&str> = self.ports.iter().map(|p| p.name.as_str()).collect();
        out.push(&format!("module {} ({});", self.module, names.join(", ")), false);
        for p in &self.ports {
            let dir = match p.dir {
                Dir::In => "input",
                Dir::Out => "output",
            };
            out.push(&format!("  {dir} {}{};", range(p.width), p.name), false);
        }
    }

    pub(crate) fn rtl(&self) -> Emitted {
        let widths = self.widths();
        let mut out = Lines::new();
        self.header(&mut out);
        for item in &self.items {
            match &item.kind {
                ItemKind::Wire { name, width, .. } => {
                    out.push(&format!("  wire {}{name};", range(*width)), item.inserted)
                }
                ItemKind::Reg { name, width, .. } => {
                    out.push(&format!("  reg {}{name};", range(*width)), item.inserted)
                }
                ItemKind::Drive { .. } => {}
            }
        }
        for item in &self.items {
            match &item.kind {
                ItemKind::Wire { name, expr, .. } | ItemKind::Drive { name, expr } => {
                    out.push(&format!("  assign {name} = {};", expr.verilog(&widths)), item.inserted)
                }
                ItemKind::Reg { .. } => {}
            }
        }
        for item in &self.items {
            if let ItemKind::Reg { name, width, next, enable } = &item.kind {
                let m = item.inserted;
                out.push("  always @(posedge clk) begin", m);
                out.push(&format!("    if (rst) {name} <= {width}'d0;"), m);
                let mut line = String::from("    else ");
                if let Some(en) = enable {
                    let _ = write!(line, "if ({}) ", en.verilog(&widths));
                }
                let _ = write!(line, "{name} <= {};", next.verilog(&widths));
                out.push(&line, m);
                out.push("  end", m);
            }
        }
        out.push("endmodule", false);
        out.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(line_ranges(&[3, 4, 5, 9, 11, 12]), "3-5,9,11-12");
        assert_eq!(line_ranges(&[]), "");
    }

    #[test]
    fn rtl_text() {
        let d = Design {
            module: "m".into(),
            ports: vec![
                Port { name: "clk".into(), dir: Dir::In, width: 1 },
                Port { name: "rst".into(), dir: Dir::In, width: 1 },
                Port { name: "q".into(), dir: Dir::Out, width: 4 },
            ],
            items: vec![
                Item {
                    kind: ItemKind::Reg {
                        name: "c".into(),
                        width: 4,
                        next: bin(Bin::Add, sig("c"), lit(1, 4)),
                        enable: None,
                    },
                    inserted: false,
                },
                Item { kind: ItemKind::Drive { name: "q".into(), expr: sig("c") }, inserted: true },
            ],
        };
        let e = d.rtl();
        assert_eq!(
            e.text,
            "module m (clk, rst, q);\n  input clk;\n  input rst;\n  output [3:0] q;\n  reg [3:0] c;\n  assign q = c;\n  always @(posedge clk) begin\n    if (rst) c <= 4'd0;\n    else c <= (c + 4'd1);\n  end\nendmodule\n"
        );
        assert_eq!(e.inserted_lines, [6]);
    }
}
