// SPDX-License-Identifier: Apache-2.0

//! Source flattening: comment and attribute removal, compiler-directive
//! expansion, identifier sanitization, and line provenance.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::node::Dialect;

use super::FrontendError;

/// One input file handed to [`preprocess`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        Self { path: path.into(), text: text.into() }
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        Ok(Self::new(path.display().to_string(), std::fs::read_to_string(path)?))
    }
}

/// A run of lines of the flattened text that came from one file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub file: String,
    /// First line (1-based) of the span inside [`SourceUnit::text`].
    pub unit_line: usize,
    /// First line (1-based) of the span inside `file`.
    pub file_line: usize,
    pub line_count: usize,
}

/// An identifier rewritten by the sanitizer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rename {
    pub original: String,
    pub sanitized: String,
}

/// Flattened, preprocessed Verilog text of one design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub text: String,
    pub origin: Vec<Provenance>,
    pub dialect: Dialect,
    pub renames: Vec<Rename>,
}

impl SourceUnit {
    /// Maps a 1-based line of the flattened text back to `(file, line)`.
    pub fn locate(&self, unit_line: usize) -> Option<(&str, usize)> {
        self.origin
            .iter()
            .find(|p| unit_line >= p.unit_line && unit_line < p.unit_line + p.line_count)
            .map(|p| (p.file.as_str(), p.file_line + (unit_line - p.unit_line)))
    }

    /// Original spelling of a sanitized identifier, if it was rewritten.
    pub fn original_name(&self, sanitized: &str) -> Option<&str> {
        self.renames.iter().find(|r| r.sanitized == sanitized).map(|r| r.original.as_str())
    }

    pub fn line_count(&self) -> usize {
        self.text.lines().count()
    }
}

/// Flattens `files` into one [`SourceUnit`].
///
/// Files pulled in through `` `include `` are expanded at the include site and
/// are not emitted a second time on their own.
pub fn preprocess(files: &[SourceFile], dialect: Dialect) -> Result<SourceUnit, FrontendError> {
    if files.is_empty() {
        return Err(FrontendError::EmptyInput);
    }
    let stripped: Vec<String> = files.iter().map(|f| strip_comments(&f.text)).collect();

    let mut included = BTreeSet::new();
    for text in &stripped {
        for line in text.lines() {
            if let Some(target) = include_target(line) {
                if let Some(idx) = resolve_include(files, &target) {
                    included.insert(idx);
                }
            }
        }
    }

    let mut state = State { files, stripped: &stripped, defines: HashMap::new(), out: Vec::new(), origin: Vec::new() };
    for idx in 0..files.len() {
        if !included.contains(&idx) {
            state.process_file(idx, &mut Vec::new())?;
        }
    }

    let mut text = state.out.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    let (text, renames) = sanitize(&text);
    check_modules(&text)?;

    Ok(SourceUnit { text, origin: state.origin, dialect, renames })
}

struct State<'a> {
    files: &'a [SourceFile],
    stripped: &'a [String],
    defines: HashMap<String, String>,
    out: Vec<String>,
    origin: Vec<Provenance>,
}

impl State<'_> {
    fn open_span(&mut self, file: usize, file_line: usize) {
        self.origin.push(Provenance {
            file: self.files[file].path.clone(),
            unit_line: self.out.len() + 1,
            file_line,
            line_count: 0,
        });
    }

    fn push_line(&mut self, line: String) {
        self.out.push(line);
        if let Some(span) = self.origin.last_mut() {
            span.line_count += 1;
        }
    }

    fn process_file(&mut self, idx: usize, stack: &mut Vec<usize>) -> Result<(), FrontendError> {
        if stack.contains(&idx) {
            return Err(FrontendError::UnresolvedInclude {
                file: self.files[idx].path.clone(),
                reason: "recursive include".into(),
            });
        }
        stack.push(idx);
        let path = self.files[idx].path.clone();
        let lines: Vec<&str> = self.stripped[idx].lines().collect();
        self.open_span(idx, 1);

        // (active, any branch taken) per conditional level
        let mut conds: Vec<(bool, bool)> = Vec::new();
        let active = |conds: &[(bool, bool)]| conds.iter().all(|c| c.0);

        let mut i = 0;
        while i < lines.len() {
            let lineno = i + 1;
            let mut line = lines[i].to_string();
            i += 1;
            let trimmed = line.trim_start();
            let Some(rest) = trimmed.strip_prefix('`') else {
                if active(&conds) {
                    let expanded = self.expand_macros(&line, &path, lineno)?;
                    self.push_line(expanded);
                } else {
                    self.push_line(String::new());
                }
                continue;
            };
            let directive: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
            let args = rest[directive.len()..].trim().to_string();
            match directive.as_str() {
                "ifdef" | "ifndef" => {
                    let defined = self.defines.contains_key(args.split_whitespace().next().unwrap_or(""));
                    let take = if directive == "ifdef" { defined } else { !defined };
                    conds.push((take, take));
                    self.push_line(String::new());
                }
                "elsif" => {
                    let defined = self.defines.contains_key(args.split_whitespace().next().unwrap_or(""));
                    let Some(top) = conds.last_mut() else {
                        return Err(directive_error(&path, lineno, "`elsif without `ifdef"));
                    };
                    let take = !top.1 && defined;
                    *top = (take, top.1 || take);
                    self.push_line(String::new());
                }
                "else" => {
                    let Some(top) = conds.last_mut() else {
                        return Err(directive_error(&path, lineno, "`else without `ifdef"));
                    };
                    *top = (!top.1, true);
                    self.push_line(String::new());
                }
                "endif" => {
                    if conds.pop().is_none() {
                        return Err(directive_error(&path, lineno, "`endif without `ifdef"));
                    }
                    self.push_line(String::new());
                }
                _ if !active(&conds) => self.push_line(String::new()),
                "define" => {
                    // backslash continuation keeps later lines blank so numbering holds
                    let mut body = args;
                    let mut extra = 0;
                    while body.ends_with('\\') && i < lines.len() {
                        body.pop();
                        body.push(' ');
                        body.push_str(lines[i].trim());
                        i += 1;
                        extra += 1;
                    }
                    let name: String = body.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
                    if name.is_empty() {
                        return Err(directive_error(&path, lineno, "`define without a name"));
                    }
                    if body[name.len()..].starts_with('(') {
                        return Err(FrontendError::UnsupportedConstruct {
                            construct: format!("function-like macro `{name}`"),
                            file: path.clone(),
                            line: lineno,
                        });
                    }
                    let value = body[name.len()..].trim().to_string();
                    self.defines.insert(name, value);
                    for _ in 0..=extra {
                        self.push_line(String::new());
                    }
                }
                "undef" => {
                    self.defines.remove(args.trim());
                    self.push_line(String::new());
                }
                "include" => {
                    let target = include_target(&line).unwrap_or_default();
                    let Some(inc) = resolve_include(self.files, &target) else {
                        return Err(FrontendError::UnresolvedInclude {
                            file: target,
                            reason: format!("included from {path}:{lineno} but not among the input files"),
                        });
                    };
                    self.process_file(inc, stack)?;
                    self.open_span(idx, lineno);
                    // the include line itself becomes blank
                    self.push_line(String::new());
                }
                "timescale"
                | "default_nettype"
                | "resetall"
                | "celldefine"
                | "endcelldefine"
                | "nounconnected_drive"
                | "unconnected_drive" => {
                    self.push_line(String::new());
                }
                _ => {
                    // a macro usage at the start of a line
                    line = self.expand_macros(&line, &path, lineno)?;
                    self.push_line(line);
                }
            }
        }
        if !conds.is_empty() {
            return Err(directive_error(&path, lines.len(), "unterminated `ifdef"));
        }
        stack.pop();
        Ok(())
    }

    fn expand_macros(&self, line: &str, file: &str, lineno: usize) -> Result<String, FrontendError> {
        let mut current = line.to_string();
        for _ in 0..32 {
            if !current.contains('`') {
                return Ok(current);
            }
            let mut out = String::with_capacity(current.len());
            let mut chars = current.char_indices().peekable();
            while let Some((pos, c)) = chars.next() {
                if c != '`' {
                    out.push(c);
                    continue;
                }
                let name: String =
                    current[pos + 1..].chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
                let Some(value) = self.defines.get(&name) else {
                    return Err(FrontendError::UndefinedMacro { name, file: file.to_string(), line: lineno });
                };
                out.push_str(value);
                for _ in 0..name.len() {
                    chars.next();
                }
            }
            current = out;
        }
        Err(directive_error(file, lineno, "macro expansion too deep"))
    }
}

fn directive_error(file: &str, line: usize, msg: &str) -> FrontendError {
    FrontendError::Syntax { file: file.to_string(), line, column: 1, message: msg.to_string() }
}

fn include_target(line: &str) -> Option<String> {
    let rest = line.trim_start().strip_prefix("`include")?;
    let rest = rest.trim();
    let inner = rest
        .strip_prefix('"')
        .and_then(|r| r.split('"').next())
        .or_else(|| rest.strip_prefix('<').and_then(|r| r.split('>').next()))?;
    Some(inner.to_string())
}

fn resolve_include(files: &[SourceFile], target: &str) -> Option<usize> {
    files.iter().position(|f| f.path == target).or_else(|| {
        let base = Path::new(target).file_name()?;
        files.iter().position(|f| Path::new(&f.path).file_name() == Some(base))
    })
}

/// Removes `//` and `/* */` comments and `(* ... *)` attributes. Newlines
/// inside removed regions are kept so line numbers survive.
pub fn strip_comments(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let mut last_copy = 0;
    let flush = |out: &mut String, from: usize, to: usize| out.push_str(&text[from..to]);
    while i < bytes.len() {
        match bytes[i] {
            b'"' => {
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i += 1;
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                flush(&mut out, last_copy, i);
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                last_copy = i;
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                flush(&mut out, last_copy, i);
                i += 2;
                while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                    if bytes[i] == b'\n' {
                        out.push('\n');
                    }
                    i += 1;
                }
                i = (i + 2).min(bytes.len());
                last_copy = i;
            }
            b'(' if bytes.get(i + 1) == Some(&b'*') && is_attribute_start(bytes, i) => {
                flush(&mut out, last_copy, i);
                i += 2;
                while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b')')) {
                    if bytes[i] == b'\n' {
                        out.push('\n');
                    }
                    i += 1;
                }
                i = (i + 2).min(bytes.len());
                last_copy = i;
            }
            _ => i += 1,
        }
    }
    flush(&mut out, last_copy, bytes.len().min(text.len()));
    out
}

// `@(*)` is a sensitivity list, not an attribute
fn is_attribute_start(bytes: &[u8], i: usize) -> bool {
    let mut j = i + 2;
    while j < bytes.len() && bytes[j].is_ascii_whitespace() {
        j += 1;
    }
    if bytes.get(j) == Some(&b')') {
        return false;
    }
    let mut k = i;
    while k > 0 && bytes[k - 1].is_ascii_whitespace() {
        k -= 1;
    }
    !(k > 0 && bytes[k - 1] == b'@')
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

fn is_real_literal(run: &str) -> bool {
    let mut parts = run.splitn(2, ['e', 'E']);
    let mantissa = parts.next().unwrap_or("");
    let exp_ok = parts.next().is_none_or(|e| !e.is_empty() && e.bytes().all(|b| b.is_ascii_digit()));
    !mantissa.is_empty() && mantissa.bytes().all(|b| b.is_ascii_digit() || b == b'_') && exp_ok
}

/// Short stable name for an escaped identifier.
pub fn escaped_name(original: &str) -> String {
    let digest = Sha256::digest(original.as_bytes());
    let hex: String = digest.iter().take(4).map(|b| format!("{b:02x}")).collect();
    format!("esc_{hex}")
}

/// Rewrites identifiers that the parser cannot accept: digit-leading names get a
/// `_` prefix and escaped identifiers become `esc_<hash>`.
pub fn sanitize(text: &str) -> (String, Vec<Rename>) {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut renames = BTreeMap::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'"' {
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(bytes.len());
            out.push_str(&text[start..i]);
        } else if c == b'\\' {
            let start = i;
            i += 1;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            let original = &text[start..i];
            let name = escaped_name(original);
            renames.insert(name.clone(), original.to_string());
            out.push_str(&name);
            // the terminating whitespace belongs to the escaped identifier
            if i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
                out.push(' ');
            }
        } else if c == b'\'' {
            // based literal: keep base and digits verbatim, even after whitespace
            let start = i;
            i += 1;
            if i < bytes.len() && (bytes[i] == b's' || bytes[i] == b'S') {
                i += 1;
            }
            if i < bytes.len() && b"bBoOdDhH".contains(&bytes[i]) {
                i += 1;
                while i < bytes.len() && (bytes[i] == b' ' || bytes[i] == b'\t') {
                    i += 1;
                }
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'?') {
                    i += 1;
                }
            }
            out.push_str(&text[start..i]);
        } else if is_ident_char(c) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            let run = &text[start..i];
            if c.is_ascii_digit() && !is_real_literal(run) && !run.bytes().all(|b| b.is_ascii_digit() || b == b'_') {
                let name = format!("_{run}");
                renames.insert(name.clone(), run.to_string());
                out.push_str(&name);
            } else {
                out.push_str(run);
            }
        } else {
            let ch = text[i..].chars().next().unwrap();
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    let renames = renames.into_iter().map(|(sanitized, original)| Rename { original, sanitized }).collect();
    (out, renames)
}

/// Identifier words of `text`, skipping string literals.
fn words(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                i += 1;
            }
            i += 1;
        } else if bytes[i] == b'\'' {
            // skip based-literal digits
            i += 1;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
        } else if is_ident_char(bytes[i]) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            out.push(&text[start..i]);
        } else {
            i += 1;
        }
    }
    out
}

/// Names of modules declared in `text`, in order.
pub fn declared_modules(text: &str) -> Vec<String> {
    let w = words(text);
    w.windows(2).filter(|p| p[0] == "module" || p[0] == "macromodule").map(|p| p[1].to_string()).collect()
}

fn check_modules(text: &str) -> Result<(), FrontendError> {
    let modules = declared_modules(text);
    let mut seen = BTreeSet::new();
    for m in &modules {
        if !seen.insert(m.as_str()) {
            return Err(FrontendError::DuplicateModule(m.clone()));
        }
    }
    if modules.len() <= 1 {
        return Ok(());
    }
    let w = words(text);
    let mut uses: BTreeMap<&str, usize> = modules.iter().map(|m| (m.as_str(), 0)).collect();
    for (k, word) in w.iter().enumerate() {
        let after_decl = k > 0 && (w[k - 1] == "module" || w[k - 1] == "macromodule");
        if !after_decl {
            if let Some(n) = uses.get_mut(word) {
                *n += 1;
            }
        }
    }
    let tops: Vec<String> = modules.iter().filter(|m| uses[m.as_str()] == 0).cloned().collect();
    if tops.len() != 1 {
        return Err(FrontendError::TopModule(tops));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> SourceUnit {
        preprocess(&[SourceFile::new("a.v", text)], Dialect::Rtl).unwrap()
    }

    #[test]
    fn strips_comments_and_keeps_lines() {
        let src = "module m; // hi\n/* a\nb */ wire w;\nendmodule\n";
        let unit = one(src);
        assert_eq!(unit.text, "module m; \n\n wire w;\nendmodule\n");
        assert_eq!(unit.locate(3), Some(("a.v", 3)));
    }

    #[test]
    fn self_contained_module_is_identity_modulo_comments() {
        let src = "module top(input a, output y);\n  assign y = ~a; // invert\nendmodule\n";
        assert_eq!(one(src).text, strip_comments(src));
    }

    #[test]
    fn attributes_removed_but_star_sensitivity_kept() {
        let src =
            "(* keep = 1 *)\nmodule m(input a, output reg y);\nalways @(*) y = a;\nalways @ (* ) y = a;\nendmodule\n";
        let unit = one(src);
        assert!(!unit.text.contains("keep"));
        assert!(unit.text.contains("@(*)"));
        assert!(unit.text.contains("@ (* )"));
    }

    #[test]
    fn digit_leading_identifier_gets_prefix() {
        let unit = one("module m(input 1wire, output y);\nassign y = 1wire & 8'hff & 4'b1010 & 12;\nendmodule\n");
        assert!(unit.text.contains("input _1wire"));
        assert!(unit.text.contains("y = _1wire & 8'hff & 4'b1010 & 12;"));
        assert_eq!(unit.renames, vec![Rename { original: "1wire".into(), sanitized: "_1wire".into() }]);
        assert_eq!(unit.original_name("_1wire"), Some("1wire"));
    }

    #[test]
    fn based_literal_with_space_is_not_renamed() {
        let (text, renames) = sanitize("assign y = 8'h 1f + 1e3;");
        assert_eq!(text, "assign y = 8'h 1f + 1e3;");
        assert!(renames.is_empty());
    }

    #[test]
    fn escaped_identifiers_are_hashed() {
        let (text, renames) = sanitize("wire \\bus[3] ;\nassign \\bus[3] = a;\n");
        let name = escaped_name("\\bus[3]");
        assert_eq!(text, format!("wire {name} ;\nassign {name} = a;\n"));
        assert_eq!(renames.len(), 1);
        assert!(name.starts_with("esc_") && name.len() == 12);
    }

    #[test]
    fn defines_and_includes_expand() {
        let files = [
            SourceFile::new("defs.vh", "`define W 8\n"),
            SourceFile::new("top.v", "`include \"defs.vh\"\nmodule top(input [`W-1:0] a, output y);\n`ifdef W\nassign y = ^a;\n`else\nassign y = 0;\n`endif\nendmodule\n"),
        ];
        let unit = preprocess(&files, Dialect::Rtl).unwrap();
        assert!(unit.text.contains("input [8-1:0] a"));
        assert!(unit.text.contains("assign y = ^a;"));
        assert!(!unit.text.contains("assign y = 0;"));
        // header file is expanded once, not emitted on its own
        assert_eq!(unit.origin.iter().filter(|p| p.file == "defs.vh").count(), 1);
        let line = unit.text.lines().position(|l| l.contains("^a")).unwrap() + 1;
        assert_eq!(unit.locate(line), Some(("top.v", 4)));
    }

    #[test]
    fn flattening_keeps_both_modules() {
        let files = [
            SourceFile::new("top.v", "module top(input a, output y);\nsub u0(.i(a), .o(y));\nendmodule\n"),
            SourceFile::new("sub.v", "module sub(input i, output o);\nassign o = ~i;\nendmodule\n"),
        ];
        let unit = preprocess(&files, Dialect::Rtl).unwrap();
        assert_eq!(declared_modules(&unit.text), vec!["top", "sub"]);
        assert_eq!(unit.origin.len(), 2);
        assert_eq!(unit.locate(5), Some(("sub.v", 2)));
        for p in &unit.origin {
            assert!(p.unit_line + p.line_count <= unit.line_count() + 1);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(preprocess(&[], Dialect::Rtl), Err(FrontendError::EmptyInput)));
        let missing = [SourceFile::new("a.v", "`include \"nope.vh\"\n")];
        assert!(matches!(preprocess(&missing, Dialect::Rtl), Err(FrontendError::UnresolvedInclude { .. })));
        let dup = [SourceFile::new("a.v", "module m; endmodule\n"), SourceFile::new("b.v", "module m; endmodule\n")];
        assert!(matches!(preprocess(&dup, Dialect::Rtl), Err(FrontendError::DuplicateModule(m)) if m == "m"));
        let two_tops = [SourceFile::new("a.v", "module a; endmodule\nmodule b; endmodule\n")];
        assert!(matches!(preprocess(&two_tops, Dialect::Rtl), Err(FrontendError::TopModule(t)) if t.len() == 2));
        let undefined = [SourceFile::new("a.v", "module a; wire [`N:0] w; endmodule\n")];
        assert!(matches!(preprocess(&undefined, Dialect::Rtl), Err(FrontendError::UndefinedMacro { .. })));
    }
}
