// SPDX-License-Identifier: Apache-2.0

//! Bit-level lowering of a [`Design`] to a generic-gate netlist: primitive
//! gates, `MUX2` cells and `DFFR` flip-flops, with constant folding.

use std::collections::HashMap;

use super::ir::{range, Bin, Design, Emitted, Expr, ItemKind, Lines};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Bit {
    Zero,
    One,
    Net(String),
}

impl Bit {
    fn text(&self) -> String {
        match self {
            Bit::Zero => "1'b0".into(),
            Bit::One => "1'b1".into(),
            Bit::Net(n) => n.clone(),
        }
    }

    fn constant(v: bool) -> Bit {
        if v {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

struct Blaster<'a> {
    widths: &'a HashMap<String, u32>,
    nets: usize,
    cells: usize,
    decls: Vec<String>,
    body: Vec<(String, bool)>,
    inserted: bool,
}

impl Blaster<'_> {
    fn signal_bit(&self, name: &str, i: u32) -> Bit {
        if self.widths[name] == 1 {
            Bit::Net(name.to_string())
        } else {
            Bit::Net(format!("{name}[{i}]"))
        }
    }

    fn fresh(&mut self) -> String {
        self.nets += 1;
        let n = format!("n{}", self.nets);
        self.decls.push(n.clone());
        n
    }

    fn emit(&mut self, line: String) {
        self.body.push((line, self.inserted));
    }

    fn gate(&mut self, kind: &str, inputs: &[&Bit]) -> Bit {
        let out = self.fresh();
        self.cells += 1;
        let args: Vec<String> = inputs.iter().map(|b| b.text()).collect();
        self.emit(format!("  {kind} g{} ({out}, {});", self.cells, args.join(", ")));
        Bit::Net(out)
    }

    fn not(&mut self, a: &Bit) -> Bit {
        match a {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
            _ => self.gate("not", &[a]),
        }
    }

    fn and(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Bit::Zero, _) | (_, Bit::Zero) => Bit::Zero,
            (Bit::One, x) | (x, Bit::One) => x.clone(),
            _ if a == b => a.clone(),
            _ => self.gate("and", &[a, b]),
        }
    }

    fn or(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Bit::One, _) | (_, Bit::One) => Bit::One,
            (Bit::Zero, x) | (x, Bit::Zero) => x.clone(),
            _ if a == b => a.clone(),
            _ => self.gate("or", &[a, b]),
        }
    }

    fn xor(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Bit::Zero, x) | (x, Bit::Zero) => x.clone(),
            (Bit::One, x) | (x, Bit::One) => self.not(&x.clone()),
            _ if a == b => Bit::Zero,
            _ => self.gate("xor", &[a, b]),
        }
    }

    fn xnor(&mut self, a: &Bit, b: &Bit) -> Bit {
        match (a, b) {
            (Bit::One, x) | (x, Bit::One) => x.clone(),
            (Bit::Zero, x) | (x, Bit::Zero) => self.not(&x.clone()),
            _ if a == b => Bit::One,
            _ => self.gate("xnor", &[a, b]),
        }
    }

    /// `sel ? b : a`, as a `MUX2` cell.
    fn mux(&mut self, sel: &Bit, b: &Bit, a: &Bit) -> Bit {
        match sel {
            Bit::One => return b.clone(),
            Bit::Zero => return a.clone(),
            _ if a == b => return a.clone(),
            _ => {}
        }
        let out = self.fresh();
        self.cells += 1;
        self.emit(format!(
            "  MUX2 c{} (.A({}), .B({}), .S({}), .Y({out}));",
            self.cells,
            a.text(),
            b.text(),
            sel.text()
        ));
        Bit::Net(out)
    }

    fn reduce_and(&mut self, mut bits: Vec<Bit>) -> Bit {
        if bits.is_empty() {
            return Bit::One;
        }
        while bits.len() > 1 {
            let mut next = Vec::with_capacity(bits.len().div_ceil(2));
            for pair in bits.chunks(2) {
                next.push(match pair {
                    [a, b] => self.and(a, b),
                    [a] => a.clone(),
                    _ => unreachable!(),
                });
            }
            bits = next;
        }
        bits.pop().expect("one bit")
    }

    /// LSB first, zero-extended or truncated to `width`.
    fn lower(&mut self, e: &Expr, width: u32) -> Vec<Bit> {
        let mut bits = self.lower_natural(e);
        bits.resize(width as usize, Bit::Zero);
        bits
    }

    fn lower_natural(&mut self, e: &Expr) -> Vec<Bit> {
        match e {
            Expr::Sig(n) => (0..self.widths[n]).map(|i| self.signal_bit(n, i)).collect(),
            Expr::Const(v, w) => (0..*w).map(|i| Bit::constant(v >> i & 1 == 1)).collect(),
            Expr::Bin(op, a, b) => {
                let w = e.width(self.widths);
                let a = self.lower(a, w);
                let b = self.lower(b, w);
                match op {
                    Bin::And => a.iter().zip(&b).map(|(x, y)| self.and(x, y)).collect(),
                    Bin::Or => a.iter().zip(&b).map(|(x, y)| self.or(x, y)).collect(),
                    Bin::Xor => a.iter().zip(&b).map(|(x, y)| self.xor(x, y)).collect(),
                    Bin::Add => {
                        let mut carry = Bit::Zero;
                        let mut out = Vec::with_capacity(w as usize);
                        for (i, (x, y)) in a.iter().zip(&b).enumerate() {
                            let p = self.xor(x, y);
                            out.push(self.xor(&p, &carry));
                            if i + 1 < w as usize {
                                let g = self.and(x, y);
                                let t = self.and(&p, &carry);
                                carry = self.or(&g, &t);
                            }
                        }
                        out
                    }
                }
            }
            Expr::Not(a) => {
                let bits = self.lower_natural(a);
                bits.iter().map(|b| self.not(b)).collect()
            }
            Expr::Eq(a, b) => {
                let w = a.width(self.widths).max(b.width(self.widths));
                let a = self.lower(a, w);
                let b = self.lower(b, w);
                let same: Vec<Bit> = a.iter().zip(&b).map(|(x, y)| self.xnor(x, y)).collect();
                vec![self.reduce_and(same)]
            }
            Expr::Mux(s, t, f) => {
                let w = e.width(self.widths);
                let s = self.lower(s, 1).remove(0);
                let t = self.lower(t, w);
                let f = self.lower(f, w);
                t.iter().zip(&f).map(|(x, y)| self.mux(&s, x, y)).collect()
            }
            Expr::Slice(n, msb, lsb) => (*lsb..=*msb).map(|i| self.signal_bit(n, i)).collect(),
            Expr::Concat(parts) => {
                let mut out = Vec::new();
                for p in parts.iter().rev() {
                    out.extend(self.lower_natural(p));
                }
                out
            }
            Expr::Repl(n, a) => {
                let bits = self.lower_natural(a);
                (0..*n).flat_map(|_| bits.clone()).collect()
            }
        }
    }

    fn drive(&mut self, name: &str, bits: &[Bit]) {
        for (i, b) in bits.iter().enumerate() {
            let target = self.signal_bit(name, i as u32).text();
            self.emit(format!("  assign {target} = {};", b.text()));
        }
    }
}

impl Design {
    /// Gate-level rendering of the same behaviour as [`Design::rtl`].
    pub(crate) fn netlist(&self) -> Emitted {
        let widths = self.widths();
        let mut b =
            Blaster { widths: &widths, nets: 0, cells: 0, decls: Vec::new(), body: Vec::new(), inserted: false };
        let mut internal = Vec::new();
        for item in &self.items {
            b.inserted = item.inserted;
            match &item.kind {
                ItemKind::Wire { name, width, expr } => {
                    internal.push((name.clone(), *width, item.inserted));
                    let bits = b.lower(expr, *width);
                    b.drive(name, &bits);
                }
                ItemKind::Drive { name, expr } => {
                    let bits = b.lower(expr, widths[name]);
                    b.drive(name, &bits);
                }
                ItemKind::Reg { name, width, next, enable } => {
                    internal.push((name.clone(), *width, item.inserted));
                    let mut d = b.lower(next, *width);
                    if let Some(en) = enable {
                        let en = b.lower(en, 1).remove(0);
                        d = (0..*width)
                            .map(|i| {
                                let q = b.signal_bit(name, i);
                                b.mux(&en, &d[i as usize], &q)
                            })
                            .collect();
                    }
                    for (i, bit) in d.iter().enumerate() {
                        b.cells += 1;
                        let q = b.signal_bit(name, i as u32).text();
                        b.emit(format!("  DFFR f{} (.C(clk), .R(rst), .D({}), .Q({q}));", b.cells, bit.text()));
                    }
                }
            }
        }

        let mut out = Lines::new();
        self.header(&mut out);
        for (name, width, inserted) in &internal {
            out.push(&format!("  wire {}{name};", range(*width)), *inserted);
        }
        let decls = std::mem::take(&mut b.decls);
        for chunk in decls.chunks(8) {
            out.push(&format!("  wire {};", chunk.join(", ")), false);
        }
        for (line, inserted) in &b.body {
            out.push(line, *inserted);
        }
        out.push("endmodule", false);
        out.finish()
    }
}
