// SPDX-License-Identifier: Apache-2.0

//! Seeded generator of small clean and trojan-infected designs, each
//! emitted both as RTL and as a matching generic-gate netlist.

mod gates;
mod ir;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::node::{Dialect, Label};

use self::ir::{bin, bit, eq, lit, mux, not, sig, slice, Bin, Design, Dir, Expr, Item, ItemKind, Port};
use super::corpus::{write_manifest, CorpusEntry};
use super::PipelineError;

/// Base-circuit families, in generation order.
pub const FAMILIES: [&str; 5] = ["timer", "fsm", "cipher", "serial", "accum"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    TimeBomb,
    CheatCode,
    Sequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    Leak,
    Deny,
    Flip,
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trigger::TimeBomb => "time_bomb",
            Trigger::CheatCode => "cheat_code",
            Trigger::Sequence => "sequence",
        })
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Payload::Leak => "leak",
            Payload::Deny => "deny",
            Payload::Flip => "flip",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDesign {
    pub id: String,
    pub family: String,
    pub label: Label,
    pub trojan: Option<(Trigger, Payload)>,
    pub rtl: String,
    pub netlist: String,
    /// Inserted lines of the RTL text, as `a-b,c`; empty for clean designs.
    pub rtl_region: String,
    pub netlist_region: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub designs: Vec<GeneratedDesign>,
}

/// Names that may appear in any family, clean or infected.
const SHARED_NAMES: &[&str] = &[
    "aux", "tmp", "hold", "stage", "flag", "sync", "mid", "dly", "mark", "cap", "latch_q", "pend", "seen", "snap",
    "qreg", "side", "edge_q", "prev", "spare", "track",
];

struct Builder {
    ports: Vec<Port>,
    items: Vec<Item>,
    used: HashSet<String>,
    inserting: bool,
}

impl Builder {
    fn new() -> Self {
        let mut b = Builder { ports: Vec::new(), items: Vec::new(), used: HashSet::new(), inserting: false };
        b.port("clk", Dir::In, 1);
        b.port("rst", Dir::In, 1);
        b
    }

    fn pick(&mut self, rng: &mut ChaCha8Rng, pool: &[&str]) -> String {
        let mut options: Vec<&str> = pool.iter().copied().filter(|n| !self.used.contains(*n)).collect();
        options.sort_unstable();
        let name = match options.choose(rng) {
            Some(n) => n.to_string(),
            None => {
                let base = pool[rng.gen_range(0..pool.len())];
                (1..).map(|i| format!("{base}{i}")).find(|n| !self.used.contains(n)).expect("unbounded")
            }
        };
        self.used.insert(name.clone());
        name
    }

    fn port(&mut self, name: &str, dir: Dir, width: u32) -> String {
        self.used.insert(name.to_string());
        self.ports.push(Port { name: name.to_string(), dir, width });
        name.to_string()
    }

    fn input(&mut self, rng: &mut ChaCha8Rng, pool: &[&str], width: u32) -> String {
        let n = self.pick(rng, pool);
        self.port(&n, Dir::In, width)
    }

    fn output(&mut self, rng: &mut ChaCha8Rng, pool: &[&str], width: u32, expr: Expr) -> String {
        let n = self.pick(rng, pool);
        self.port(&n, Dir::Out, width);
        self.push(ItemKind::Drive { name: n.clone(), expr });
        n
    }

    fn push(&mut self, kind: ItemKind) {
        self.items.push(Item { kind, inserted: self.inserting });
    }

    fn wire(&mut self, rng: &mut ChaCha8Rng, pool: &[&str], width: u32, expr: Expr) -> String {
        let n = self.pick(rng, pool);
        self.push(ItemKind::Wire { name: n.clone(), width, expr });
        n
    }

    fn reg(&mut self, rng: &mut ChaCha8Rng, pool: &[&str], width: u32, next: Expr, enable: Option<Expr>) -> String {
        let n = self.pick(rng, pool);
        self.push(ItemKind::Reg { name: n.clone(), width, next, enable });
        n
    }

    fn reg_named(&mut self, name: &str, width: u32, next: Expr, enable: Option<Expr>) {
        self.used.insert(name.to_string());
        self.push(ItemKind::Reg { name: name.to_string(), width, next, enable });
    }

    fn width_of(&self, name: &str) -> u32 {
        self.design("x").widths()[name]
    }

    fn inputs(&self, min_width: u32) -> Vec<(String, u32)> {
        self.ports
            .iter()
            .filter(|p| p.dir == Dir::In && p.name != "clk" && p.name != "rst" && p.width >= min_width)
            .map(|p| (p.name.clone(), p.width))
            .collect()
    }

    fn regs(&self) -> Vec<(String, u32)> {
        self.items
            .iter()
            .filter_map(|i| match &i.kind {
                ItemKind::Reg { name, width, .. } => Some((name.clone(), *width)),
                _ => None,
            })
            .collect()
    }

    fn design(&self, module: &str) -> Design {
        Design { module: module.to_string(), ports: self.ports.clone(), items: self.items.clone() }
    }
}

fn range_u(rng: &mut ChaCha8Rng, lo: u32, hi: u32) -> u32 {
    rng.gen_range(lo..=hi)
}

fn random_value(rng: &mut ChaCha8Rng, width: u32) -> u64 {
    rng.gen::<u64>() & ir::mask(width)
}

/// Registers an output, as a pipeline stage would.
fn maybe_register_output(b: &mut Builder, rng: &mut ChaCha8Rng) {
    if !rng.gen_bool(0.5) {
        return;
    }
    let outs: Vec<usize> = (0..b.items.len()).filter(|&i| matches!(b.items[i].kind, ItemKind::Drive { .. })).collect();
    let Some(&i) = outs.choose(rng) else { return };
    let ItemKind::Drive { name, expr } = b.items[i].kind.clone() else { unreachable!() };
    let width = b.width_of(&name);
    let r = b.reg(rng, SHARED_NAMES, width, expr, None);
    b.items[i].kind = ItemKind::Drive { name, expr: sig(&r) };
}

/// A sticky status bit, set by some condition and cleared only by reset.
fn maybe_sticky_status(b: &mut Builder, rng: &mut ChaCha8Rng, cond: Expr) {
    if !rng.gen_bool(0.3) {
        return;
    }
    let name = b.pick(rng, SHARED_NAMES);
    b.reg_named(&name, 1, bin(Bin::Or, sig(&name), cond), None);
    b.output(rng, &["status", "err", "sticky", "ovf"], 1, sig(&name));
}

fn timer(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let w = range_u(rng, 4, 8);
    let en = b.input(rng, &["en", "enable", "run", "go"], 1);
    let ld = b.input(rng, &["load", "ld", "set"], 1);
    let din = b.input(rng, &["din", "preset", "value", "init_val"], w);
    let cnt_name = b.pick(rng, &["count", "cnt", "timer", "ticks"]);
    let mut enable = sig(&en);
    if rng.gen_bool(0.5) {
        let pw = range_u(rng, 2, 3);
        let pre = b.pick(rng, &["div", "prescale", "pre"]);
        b.reg_named(&pre, pw, bin(Bin::Add, sig(&pre), lit(1, pw)), None);
        enable = bin(Bin::And, enable, eq(sig(&pre), lit(0, pw)));
    }
    let next = mux(sig(&ld), sig(&din), bin(Bin::Add, sig(&cnt_name), lit(1, w)));
    b.reg_named(&cnt_name, w, next, Some(bin(Bin::Or, enable, sig(&ld))));
    let limit = random_value(rng, w) | 1;
    let tick = b.wire(rng, &["tick", "wrap", "hit", "expire"], 1, eq(sig(&cnt_name), lit(limit, w)));
    b.output(rng, &["q", "cur", "cnt_out"], w, sig(&cnt_name));
    b.output(rng, &["tc", "done", "irq"], 1, sig(&tick));
    maybe_sticky_status(&mut b, rng, bin(Bin::And, sig(&tick), sig(&ld)));
    maybe_register_output(&mut b, rng);
    b
}

fn fsm(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let sw = range_u(rng, 2, 3);
    let states = range_u(rng, 3, if sw == 2 { 4 } else { 6 });
    let conds = [
        b.input(rng, &["start", "req", "begin"], 1),
        b.input(rng, &["ack", "grant", "ready"], 1),
        b.input(rng, &["abort", "stop", "halt"], 1),
    ];
    let st = b.pick(rng, &["state", "cs", "fsm_state", "phase"]);
    let mut next = lit(0, sw);
    for s in (0..states).rev() {
        let c = &conds[rng.gen_range(0..conds.len())];
        let fwd = (s + 1) % states;
        let alt = if rng.gen_bool(0.5) { s } else { 0 };
        next = mux(eq(sig(&st), lit(s as u64, sw)), mux(sig(c), lit(fwd as u64, sw), lit(alt as u64, sw)), next);
    }
    b.reg_named(&st, sw, next, None);
    b.output(rng, &["busy", "active", "valid"], 1, not(eq(sig(&st), lit(0, sw))));
    b.output(rng, &["done", "finish", "last"], 1, eq(sig(&st), lit((states - 1) as u64, sw)));
    if rng.gen_bool(0.5) {
        let dw = range_u(rng, 3, 6);
        let din = b.input(rng, &["data", "din", "arg"], dw);
        let hold = b.reg(rng, &["dreg", "operand", "buffer"], dw, sig(&din), Some(eq(sig(&st), lit(1, sw))));
        b.output(rng, &["dout", "result", "out"], dw, sig(&hold));
    }
    maybe_sticky_status(&mut b, rng, bin(Bin::And, sig(&conds[2]), sig(&conds[1])));
    maybe_register_output(&mut b, rng);
    b
}

fn cipher(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let w = range_u(rng, 8, 12);
    let dw = range_u(rng, 4, 8);
    let ld = b.input(rng, &["load", "rekey", "init"], 1);
    let seed = b.input(rng, &["seed", "key", "iv"], w);
    let din = b.input(rng, &["plain", "din", "msg"], dw);
    let lf = b.pick(rng, &["lfsr", "state", "ks", "shift"]);
    let taps = {
        let mut t: Vec<u32> = (0..w - 1).collect();
        t.shuffle(rng);
        t.truncate(range_u(rng, 2, 3) as usize);
        t.sort_unstable();
        t
    };
    let mut fb = bit(&lf, w - 1);
    for &t in &taps {
        fb = bin(Bin::Xor, fb, bit(&lf, t));
    }
    let shifted = Expr::Concat(vec![slice(&lf, w - 2, 0), fb]);
    b.reg_named(&lf, w, mux(sig(&ld), sig(&seed), shifted), None);
    let mut ks = slice(&lf, dw - 1, 0);
    if rng.gen_bool(0.5) {
        let k = b.reg(rng, &["round_key", "rk", "mix"], dw, bin(Bin::Xor, slice(&lf, w - 1, w - dw), sig(&din)), None);
        ks = bin(Bin::Xor, ks, sig(&k));
    }
    b.output(rng, &["cipher", "dout", "ct"], dw, bin(Bin::Xor, sig(&din), ks));
    b.output(rng, &["ks_bit", "stream", "rnd"], 1, bit(&lf, 0));
    maybe_register_output(&mut b, rng);
    b
}

fn serial(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let dw = range_u(rng, 5, 8);
    let bw = range_u(rng, 3, 5);
    let ld = b.input(rng, &["send", "load", "start"], 1);
    let din = b.input(rng, &["tx_data", "din", "byte_in"], dw);
    let baud = b.pick(rng, &["baud", "clkdiv", "bcnt"]);
    let div = random_value(rng, bw) | 1;
    let btick = b.wire(rng, &["baud_tick", "strobe", "bit_en"], 1, eq(sig(&baud), lit(div, bw)));
    b.reg_named(&baud, bw, mux(sig(&btick), lit(0, bw), bin(Bin::Add, sig(&baud), lit(1, bw))), None);
    let en = bin(Bin::Or, sig(&ld), sig(&btick));
    let sh = b.pick(rng, &["shreg", "tx_shift", "sr"]);
    let load = Expr::Concat(vec![sig(&din), lit(0, 1)]);
    let shift = Expr::Concat(vec![lit(1, 1), slice(&sh, dw, 1)]);
    b.reg_named(&sh, dw + 1, mux(sig(&ld), load, shift), Some(en.clone()));
    let bc = b.pick(rng, &["bitcnt", "nbits", "idx"]);
    b.reg_named(&bc, 4, mux(sig(&ld), lit(0, 4), bin(Bin::Add, sig(&bc), lit(1, 4))), Some(en));
    b.output(rng, &["txd", "tx", "sout"], 1, bit(&sh, 0));
    b.output(rng, &["busy", "tx_busy", "active"], 1, not(eq(sig(&bc), lit((dw + 2) as u64, 4))));
    maybe_sticky_status(&mut b, rng, bin(Bin::And, sig(&ld), not(eq(sig(&bc), lit(0, 4)))));
    maybe_register_output(&mut b, rng);
    b
}

fn accum(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::new();
    let w = range_u(rng, 4, 8);
    let din = b.input(rng, &["operand", "din", "b_in"], w);
    let op = b.input(rng, &["op", "opcode", "func"], 2);
    let en = b.input(rng, &["en", "valid", "strobe"], 1);
    let acc = b.pick(rng, &["acc", "accum", "total", "sum"]);
    let next = mux(
        bit(&op, 1),
        mux(bit(&op, 0), bin(Bin::Xor, sig(&acc), sig(&din)), bin(Bin::And, sig(&acc), sig(&din))),
        mux(bit(&op, 0), bin(Bin::Add, sig(&acc), sig(&din)), sig(&din)),
    );
    b.reg_named(&acc, w, next, Some(sig(&en)));
    b.output(rng, &["result", "y", "acc_out"], w, sig(&acc));
    b.output(rng, &["zero", "is_zero", "z"], 1, eq(sig(&acc), lit(0, w)));
    if rng.gen_bool(0.5) {
        b.output(rng, &["sign", "neg", "msb"], 1, bin(Bin::Xor, bit(&acc, w - 1), bit(&din, w - 1)));
    }
    maybe_sticky_status(&mut b, rng, bin(Bin::And, sig(&en), bit(&acc, w - 1)));
    maybe_register_output(&mut b, rng);
    b
}

fn base(family: &str, rng: &mut ChaCha8Rng) -> Builder {
    match family {
        "timer" => timer(rng),
        "fsm" => fsm(rng),
        "cipher" => cipher(rng),
        "serial" => serial(rng),
        "accum" => accum(rng),
        other => unreachable!("unknown family {other}"),
    }
}

fn resize(name: &str, from: u32, to: u32) -> Expr {
    match from.cmp(&to) {
        std::cmp::Ordering::Equal => sig(name),
        std::cmp::Ordering::Greater => slice(name, to - 1, 0),
        std::cmp::Ordering::Less => Expr::Concat(vec![lit(0, to - from), sig(name)]),
    }
}

fn insert_trojan(b: &mut Builder, rng: &mut ChaCha8Rng) -> (Trigger, Payload) {
    let trigger = *[Trigger::TimeBomb, Trigger::CheatCode, Trigger::Sequence].choose(rng).expect("non-empty");
    let payload = *[Payload::Leak, Payload::Deny, Payload::Flip].choose(rng).expect("non-empty");
    let victims: Vec<usize> =
        (0..b.items.len()).filter(|&i| matches!(b.items[i].kind, ItemKind::Drive { .. })).collect();
    let victim = *victims.choose(rng).expect("every family drives an output");
    let leak_src = b.regs().choose(rng).cloned().expect("every family has a register");
    let ones = b.inputs(1).into_iter().filter(|(_, w)| *w == 1).collect::<Vec<_>>();
    // compared word: a data input, or all control inputs side by side
    let mut words: Vec<(Expr, u32)> = b.inputs(3).into_iter().map(|(n, w)| (sig(&n), w)).collect();
    if words.is_empty() {
        words.push((Expr::Concat(ones.iter().map(|(n, _)| sig(n)).collect()), ones.len() as u32));
    }

    b.inserting = true;
    let fire = match trigger {
        Trigger::TimeBomb => {
            let tw = range_u(rng, 8, 12);
            let name = b.pick(rng, SHARED_NAMES);
            let gate = if rng.gen_bool(0.5) { ones.choose(rng).map(|(n, _)| sig(n)) } else { None };
            b.reg_named(&name, tw, bin(Bin::Add, sig(&name), lit(1, tw)), gate);
            let k = random_value(rng, tw) | (1 << (tw - 1));
            eq(sig(&name), lit(k, tw))
        }
        Trigger::CheatCode => {
            let (d, w) = words.choose(rng).cloned().expect("non-empty");
            let mut c = eq(d, lit(random_value(rng, w), w));
            if let Some((o, _)) = ones.choose(rng) {
                c = bin(Bin::And, c, sig(o));
            }
            c
        }
        Trigger::Sequence => {
            let (d, w) = words.choose(rng).cloned().expect("non-empty");
            let code = random_value(rng, w);
            let first = b.reg(rng, SHARED_NAMES, 1, eq(d.clone(), lit(code, w)), None);
            bin(Bin::And, sig(&first), eq(d, lit(random_value(rng, w), w)))
        }
    };
    let fire = b.wire(rng, SHARED_NAMES, 1, fire);
    let armed = b.pick(rng, SHARED_NAMES);
    b.reg_named(&armed, 1, bin(Bin::Or, sig(&armed), sig(&fire)), None);

    let ItemKind::Drive { name, expr } = b.items[victim].kind.clone() else { unreachable!() };
    let wo = b.width_of(&name);
    let tainted = match payload {
        Payload::Leak => mux(sig(&armed), resize(&leak_src.0, leak_src.1, wo), expr),
        Payload::Deny => bin(Bin::And, expr, not(Expr::Repl(wo, Box::new(sig(&armed))))),
        Payload::Flip if wo > 1 => bin(Bin::Xor, expr, Expr::Concat(vec![lit(0, wo - 1), sig(&armed)])),
        Payload::Flip => bin(Bin::Xor, expr, sig(&armed)),
    };
    b.items[victim] = Item { kind: ItemKind::Drive { name, expr: tainted }, inserted: true };
    b.inserting = false;
    (trigger, payload)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic corpus of `n_free` clean and `n_infected` infected designs,
/// assigned to families round-robin. Infected design `j` shares its base
/// circuit with clean design `j` when both exist.
pub fn synthesize_corpus(seed: u64, n_free: usize, n_infected: usize) -> Corpus {
    let mut designs = Vec::with_capacity(n_free + n_infected);
    let mut emit = |index: usize, infected: bool| {
        let family = FAMILIES[index % FAMILIES.len()];
        let mut rng = stream_rng(seed, index as u64);
        let mut b = base(family, &mut rng);
        let mut trojan = None;
        if infected {
            let mut trng = stream_rng(seed, (1 << 32) | index as u64);
            trojan = Some(insert_trojan(&mut b, &mut trng));
        }
        let tag = if infected { "inf" } else { "free" };
        let id = format!("{family}_{:02}_{tag}", index / FAMILIES.len());
        let design = b.design(&format!("{family}_top"));
        let rtl = design.rtl();
        let net = design.netlist();
        designs.push(GeneratedDesign {
            id,
            family: family.to_string(),
            label: if infected { Label::Infected } else { Label::Free },
            trojan,
            rtl_region: rtl.region(),
            netlist_region: net.region(),
            rtl: rtl.text,
            netlist: net.text,
        });
    };
    for i in 0..n_free {
        emit(i, false);
    }
    for j in 0..n_infected {
        emit(j, true);
    }
    Corpus { designs }
}

impl Corpus {
    /// Writes `rtl/<id>.v`, `netlist/<id>.v` and one manifest per dialect
    /// (`rtl.tsv`, `netlist.tsv`) under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), PipelineError> {
        for dialect in [Dialect::Rtl, Dialect::Netlist] {
            let sub = dir.join(dialect.to_string());
            std::fs::create_dir_all(&sub).map_err(|e| PipelineError::io(&sub, e))?;
            let mut entries = Vec::with_capacity(self.designs.len());
            for d in &self.designs {
                let (text, region) = match dialect {
                    Dialect::Rtl => (&d.rtl, &d.rtl_region),
                    Dialect::Netlist => (&d.netlist, &d.netlist_region),
                };
                let rel = format!("{dialect}/{}.v", d.id);
                let path = dir.join(&rel);
                std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
                entries.push(CorpusEntry {
                    id: d.id.clone(),
                    family: d.family.clone(),
                    dialect,
                    label: d.label,
                    path: rel.into(),
                    region: region.clone(),
                });
            }
            write_manifest(&dir.join(format!("{dialect}.tsv")), &entries)?;
        }
        Ok(())
    }
}
