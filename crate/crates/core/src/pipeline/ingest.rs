// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use crate::graph::{
    load_graph, merge, normalize_netlist, optimize_netlist, save_graph, tag_rtl, trim, DataFlowGraph, GraphError,
};
use crate::hdl::{load_design, Dataflow, SourceFile};
use crate::node::Dialect;

use super::corpus::{read_manifest, write_manifest, CorpusEntry};
use super::PipelineError;

/// Full frontend for one design: parse, per-signal analysis, merge, trim,
/// then netlist optimization and normalization or RTL tagging.
pub fn extract_graph(files: &[SourceFile], dialect: Dialect) -> Result<DataFlowGraph, PipelineError> {
    let ast = load_design(files, dialect)?;
    let dfgs = Dataflow::new(&ast)?.analyze_all();
    if dfgs.is_empty() {
        return Err(PipelineError::NoOutputs);
    }
    let merged = merge(&dfgs, dialect)?;
    let (trimmed, report) = trim(&merged);
    if report.no_roots || trimmed.is_empty() {
        return Err(PipelineError::NoOutputs);
    }
    Ok(match dialect {
        Dialect::Rtl => tag_rtl(&trimmed)?,
        Dialect::Netlist => normalize_netlist(&optimize_netlist(&trimmed)?)?.0,
    })
}

/// Reads the Verilog sources of an entry: a single file, or every `.v`/`.sv`
/// file of a directory in name order.
pub fn read_sources(path: &Path) -> Result<Vec<SourceFile>, PipelineError> {
    if path.is_dir() {
        let mut paths: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| PipelineError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| matches!(p.extension().and_then(|x| x.to_str()), Some("v" | "sv" | "vh")))
            .collect();
        paths.sort();
        paths.iter().map(|p| SourceFile::read(p).map_err(|e| PipelineError::io(p, e))).collect()
    } else {
        Ok(vec![SourceFile::read(path).map_err(|e| PipelineError::io(path, e))?])
    }
}

/// Graph for one manifest entry, from Verilog or a serialized `.htg` file.
pub fn entry_graph(entry: &CorpusEntry) -> Result<DataFlowGraph, PipelineError> {
    if entry.path.extension().is_some_and(|x| x == "htg") {
        let bytes = std::fs::read(&entry.path).map_err(|e| PipelineError::io(&entry.path, e))?;
        let g = load_graph(&bytes)?.graph;
        if g.dialect != entry.dialect {
            return Err(GraphError::WrongDialect { op: "ingest", expected: entry.dialect }.into());
        }
        return Ok(g);
    }
    extract_graph(&read_sources(&entry.path)?, entry.dialect)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestFailure {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub graphs: Vec<(CorpusEntry, DataFlowGraph)>,
    pub failures: Vec<IngestFailure>,
}

/// Builds a graph for every entry; failures are collected, not fatal.
pub fn ingest_entries(entries: &[CorpusEntry]) -> IngestReport {
    let mut graphs = Vec::new();
    let mut failures = Vec::new();
    for e in entries {
        match entry_graph(e) {
            Ok(g) => graphs.push((e.clone(), g)),
            Err(err) => failures.push(IngestFailure { id: e.id.clone(), message: err.to_string() }),
        }
    }
    IngestReport { graphs, failures }
}

pub fn ingest(manifest: &Path, dialect: Dialect) -> Result<IngestReport, PipelineError> {
    Ok(ingest_entries(&read_manifest(manifest, dialect)?))
}

/// Writes `<id>.htg` per graph plus a `graphs.tsv` manifest pointing at them.
pub fn write_graphs(report: &IngestReport, out: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
    let mut entries = Vec::with_capacity(report.graphs.len());
    for (entry, g) in &report.graphs {
        let name = format!("{}.htg", entry.id);
        let path = out.join(&name);
        std::fs::write(&path, save_graph(g, Some(entry.label))?).map_err(|e| PipelineError::io(&path, e))?;
        entries.push(CorpusEntry { path: name.into(), ..entry.clone() });
    }
    write_manifest(&out.join("graphs.tsv"), &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::encode_features;
    use crate::graph::vocab::{NETLIST_SIZE, RTL_SIZE};

    #[test]
    fn rtl_and_netlist_feature_widths() {
        let rtl =
            "module t(input clk, input [3:0] a, output reg [3:0] q);\nalways @(posedge clk) q <= q ^ a;\nendmodule\n";
        let g = extract_graph(&[SourceFile::new("t.v", rtl)], Dialect::Rtl).unwrap();
        assert_eq!(encode_features(&g).unwrap().dim, RTL_SIZE);
        let net =
            "module n(a, b, y);\ninput a, b;\noutput y;\nwire w;\nnand g1 (w, a, b);\nnot g2 (y, w);\nendmodule\n";
        let g = extract_graph(&[SourceFile::new("n.v", net)], Dialect::Netlist).unwrap();
        assert_eq!(encode_features(&g).unwrap().dim, NETLIST_SIZE);
    }

    #[test]
    fn no_outputs() {
        let src = "module t(input a);\nendmodule\n";
        assert_eq!(extract_graph(&[SourceFile::new("t.v", src)], Dialect::Rtl), Err(PipelineError::NoOutputs));
    }
}
