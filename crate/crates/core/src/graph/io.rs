// SPDX-License-Identifier: Apache-2.0

//! Binary graph files.
//!
//! ```text
//! "HTG1" dialect:u8 vocab_version:v |V|:v |E|:v D:v
//! tag:v * |V|
//! (src:v dst:v) * |E|
//! (kind:u8 op:u8 name_len:v name) * |V|   op 0 = none, else 1 + Op index
//! root_count:v root:v * root_count
//! [label:u8]                               0 free, 1 infected
//! ```
//!
//! `v` is an unsigned LEB128 varint.

use serde_json::{json, Value};

use crate::node::{Dialect, Label, NodeKind, Op};

use super::features::{encode_features, FeatureMatrix};
use super::vocab::{Vocabulary, VOCAB_VERSION};
use super::{DataFlowGraph, GraphError, Node, NodeTag};

const MAGIC: &[u8; 4] = b"HTG1";

#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub graph: DataFlowGraph,
    pub features: FeatureMatrix,
    pub label: Option<Label>,
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Serializes a fully tagged graph.
pub fn save_graph(g: &DataFlowGraph, label: Option<Label>) -> Result<Vec<u8>, GraphError> {
    let features = encode_features(g)?;
    let mut out = Vec::with_capacity(16 + 4 * g.len() + 4 * g.edges.len());
    out.extend_from_slice(MAGIC);
    out.push(g.dialect.as_byte());
    put_varint(&mut out, VOCAB_VERSION as u64);
    put_varint(&mut out, g.len() as u64);
    put_varint(&mut out, g.edges.len() as u64);
    put_varint(&mut out, features.dim as u64);
    for &t in &features.hot {
        put_varint(&mut out, t as u64);
    }
    for &(s, d) in &g.edges {
        put_varint(&mut out, s as u64);
        put_varint(&mut out, d as u64);
    }
    for n in &g.nodes {
        out.push(n.kind.as_byte());
        let op = n.op.map_or(0, |op| 1 + Op::ALL.iter().position(|&o| o == op).expect("op in table"));
        out.push(op as u8);
        put_varint(&mut out, n.name.len() as u64);
        out.extend_from_slice(n.name.as_bytes());
    }
    put_varint(&mut out, g.roots.len() as u64);
    for &r in &g.roots {
        put_varint(&mut out, r as u64);
    }
    if let Some(l) = label {
        out.push(match l {
            Label::Free => 0,
            Label::Infected => 1,
        });
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn corrupt(&self, what: &str) -> GraphError {
        GraphError::CorruptFile(format!("{what} at byte {}", self.pos))
    }

    fn byte(&mut self) -> Result<u8, GraphError> {
        let b = *self.bytes.get(self.pos).ok_or_else(|| self.corrupt("unexpected end of file"))?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64, GraphError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(self.corrupt("varint too long"))
    }

    /// A count or index, bounded to keep corrupt headers from allocating.
    fn index(&mut self, bound: usize) -> Result<usize, GraphError> {
        let v = self.varint()?;
        if v as u128 >= bound as u128 {
            return Err(self.corrupt(&format!("value {v} out of range (< {bound})")));
        }
        Ok(v as usize)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn load_graph(bytes: &[u8]) -> Result<GraphFile, GraphError> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(GraphError::CorruptFile("bad magic".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let dialect = Dialect::from_byte(r.byte()?).ok_or_else(|| r.corrupt("unknown dialect"))?;
    let version = r.varint()?;
    if version != VOCAB_VERSION as u64 {
        return Err(GraphError::VersionMismatch {
            expected: VOCAB_VERSION,
            found: version.min(u32::MAX as u64) as u32,
        });
    }
    // every node and edge takes at least one byte
    let n = r.varint()?;
    let m = r.varint()?;
    if n.saturating_add(m) > r.remaining() as u64 {
        return Err(r.corrupt("counts exceed file size"));
    }
    let (n, m) = (n as usize, m as usize);
    let dim = r.varint()?;
    let vocab = Vocabulary::for_dialect(dialect);
    if dim != vocab.len() as u64 {
        return Err(r.corrupt(&format!("feature width {dim} does not match vocabulary size {}", vocab.len())));
    }
    let mut hot = Vec::with_capacity(n);
    for _ in 0..n {
        hot.push(r.index(vocab.len())?);
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let s = r.index(n)?;
        let d = r.index(n)?;
        edges.push((s, d));
    }
    let mut nodes = Vec::with_capacity(n);
    for &t in &hot {
        let kind = NodeKind::from_byte(r.byte()?).ok_or_else(|| r.corrupt("unknown node kind"))?;
        let op = match r.byte()? as usize {
            0 => None,
            k => Some(*Op::ALL.get(k - 1).ok_or_else(|| r.corrupt("unknown operation"))?),
        };
        let len = r.varint()?;
        if len > r.remaining() as u64 {
            return Err(r.corrupt("node name runs past end of file"));
        }
        let len = len as usize;
        let name = std::str::from_utf8(&bytes[r.pos..r.pos + len]).map_err(|_| r.corrupt("node name is not UTF-8"))?;
        r.pos += len;
        nodes.push(Node { kind, name: name.to_string(), op, tag: Some(NodeTag { index: t as u32 }) });
    }
    let root_count = r.index(n + 1)?;
    let mut roots = Vec::with_capacity(root_count);
    for _ in 0..root_count {
        roots.push(r.index(n)?);
    }
    let label = match r.remaining() {
        0 => None,
        1 => match r.byte()? {
            0 => Some(Label::Free),
            1 => Some(Label::Infected),
            _ => return Err(r.corrupt("bad label byte")),
        },
        _ => return Err(r.corrupt("trailing bytes")),
    };
    let graph = DataFlowGraph { dialect, nodes, edges, roots };
    graph.validate().map_err(GraphError::CorruptFile)?;
    Ok(GraphFile { graph, features: FeatureMatrix { dim: dim as usize, hot }, label })
}

/// Human-readable export.
pub fn to_json(g: &DataFlowGraph, label: Option<Label>) -> Value {
    let nodes: Vec<Value> = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            json!({
                "id": i,
                "tag": n.tag.map(|t| t.label(g.dialect)),
                "kind": n.kind.as_str(),
            })
        })
        .collect();
    json!({
        "nodes": nodes,
        "edges": g.edges.iter().map(|&(s, d)| [s, d]).collect::<Vec<_>>(),
        "label": label.map(Label::as_str),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalize_netlist;

    fn sample() -> DataFlowGraph {
        let g = DataFlowGraph {
            dialect: Dialect::Netlist,
            nodes: vec![Node::signal("y"), Node::operation(Op::Nand), Node::signal("a"), Node::constant("1'b0")],
            edges: vec![(0, 1), (1, 2), (1, 3)],
            roots: vec![0],
        };
        normalize_netlist(&g).unwrap().0
    }

    #[test]
    fn round_trip_with_and_without_label() {
        let g = sample();
        for label in [None, Some(Label::Free), Some(Label::Infected)] {
            let f = load_graph(&save_graph(&g, label).unwrap()).unwrap();
            assert_eq!(f.graph, g);
            assert_eq!(f.label, label);
            assert_eq!(f.features, encode_features(&g).unwrap());
        }
    }

    #[test]
    fn empty_graph_round_trips() {
        let g = DataFlowGraph::new(Dialect::Rtl);
        assert_eq!(load_graph(&save_graph(&g, None).unwrap()).unwrap().graph, g);
    }

    #[test]
    fn corrupt_inputs() {
        let mut bytes = save_graph(&sample(), Some(Label::Free)).unwrap();
        let good = bytes.clone();
        bytes[0] ^= 0xff;
        assert!(matches!(load_graph(&bytes), Err(GraphError::CorruptFile(_))));
        for cut in 1..good.len() - 1 {
            assert!(load_graph(&good[..cut]).is_err(), "truncated at {cut}");
        }
        let mut other = good.clone();
        other[5] = 7;
        assert_eq!(load_graph(&other), Err(GraphError::VersionMismatch { expected: 1, found: 7 }));
    }

    #[test]
    fn json_export() {
        let v = to_json(&sample(), Some(Label::Infected));
        assert_eq!(v["nodes"][1]["tag"], "nand");
        assert_eq!(v["nodes"][0]["kind"], "signal");
        assert_eq!(v["edges"][0], json!([0, 1]));
        assert_eq!(v["label"], "infected");
    }
}
