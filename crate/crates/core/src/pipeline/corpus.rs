// SPDX-License-Identifier: Apache-2.0

//! Tab-separated corpus manifests: `id family label path [region]`.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use crate::node::{Dialect, Label};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    /// Base-circuit family; the leave-one-out grouping key.
    pub family: String,
    pub dialect: Dialect,
    pub label: Label,
    /// Verilog file, directory of `.v` files, or serialized `.htg` graph.
    /// Relative paths are resolved against the manifest's directory.
    pub path: PathBuf,
    /// Inserted lines (`a-b,c`) for generated infected designs.
    pub region: String,
}

const HEADER: [&str; 5] = ["id", "family", "label", "path", "region"];

pub fn read_manifest(path: &Path, dialect: Dialect) -> Result<Vec<CorpusEntry>, PipelineError> {
    if !path.is_file() {
        return Err(PipelineError::ManifestMissing(path.to_path_buf()));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let bad = |line: u64, message: String| PipelineError::Manifest { path: path.to_path_buf(), line, message };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(true)
        .comment(Some(b'#'))
        .quoting(false)
        .from_path(path)
        .map_err(|e| PipelineError::io(path, e))?;
    let headers = reader.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(ci), Some(cf), Some(cl), Some(cp)) = (col("id"), col("family"), col("label"), col("path")) else {
        return Err(bad(1, "header must name the columns id, family, label and path".into()));
    };
    let cr = col("region");
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |c: usize| record.get(c).map(str::trim).unwrap_or("");
        let (id, family, label, rel) = (field(ci), field(cf), field(cl), field(cp));
        if id.is_empty() || family.is_empty() || rel.is_empty() {
            return Err(bad(line, "id, family and path must be non-empty".into()));
        }
        let label: Label = label.parse().map_err(|e: String| bad(line, e))?;
        if !seen.insert(id.to_string()) {
            return Err(bad(line, format!("duplicate id `{id}`")));
        }
        entries.push(CorpusEntry {
            id: id.to_string(),
            family: family.to_string(),
            dialect,
            label,
            path: base.join(rel),
            region: cr.map(field).unwrap_or("").to_string(),
        });
    }
    Ok(entries)
}

/// Writes entries with paths as given (normally relative to `path`'s directory).
pub fn write_manifest(path: &Path, entries: &[CorpusEntry]) -> Result<(), PipelineError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_path(path)
        .map_err(|e| PipelineError::io(path, e))?;
    let io = |e: csv::Error| PipelineError::io(path, e);
    w.write_record(HEADER).map_err(io)?;
    for e in entries {
        let p = e.path.to_string_lossy();
        w.write_record([e.id.as_str(), e.family.as_str(), e.label.as_str(), p.as_ref(), e.region.as_str()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

/// Families in first-seen order.
pub fn families(entries: &[CorpusEntry]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    entries.iter().filter(|e| seen.insert(e.family.as_str())).map(|e| e.family.clone()).collect()
}

/// `(train, test)` with every entry of `held_out` in test.
pub fn loo_split<T: AsRef<CorpusEntry> + Clone>(
    corpus: &[T],
    held_out: &str,
) -> Result<(Vec<T>, Vec<T>), PipelineError> {
    if !corpus.iter().any(|e| e.as_ref().family == held_out) {
        return Err(PipelineError::UnknownFamily(held_out.to_string()));
    }
    Ok(corpus.iter().cloned().partition(|e| e.as_ref().family != held_out))
}

impl AsRef<CorpusEntry> for CorpusEntry {
    fn as_ref(&self) -> &CorpusEntry {
        self
    }
}
