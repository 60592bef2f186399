// SPDX-License-Identifier: Apache-2.0

//! Verilog frontend: preprocessing, parsing, elaboration and per-signal
//! data-flow extraction.

pub mod ast;
pub mod dataflow;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod preprocess;
mod printer;

pub use ast::DesignAst;
pub use dataflow::{analyze_dataflow, list_signals, Dataflow, DfgNode, SignalDfg};
pub use parser::parse;
pub use preprocess::{preprocess, SourceFile, SourceUnit};

use crate::node::Dialect;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error("no input files")]
    EmptyInput,
    #[error("cannot resolve include `{file}`: {reason}")]
    UnresolvedInclude { file: String, reason: String },
    #[error("module `{0}` is declared more than once")]
    DuplicateModule(String),
    #[error("expected exactly one top-level module, found {}: [{}]", .0.len(), .0.join(", "))]
    TopModule(Vec<String>),
    #[error("{file}:{line}: undefined macro `{name}`")]
    UndefinedMacro { name: String, file: String, line: usize },
    #[error("{file}:{line}:{column}: syntax error: {message}")]
    Syntax { file: String, line: usize, column: usize, message: String },
    #[error("{file}:{line}: unsupported construct: {construct}")]
    UnsupportedConstruct { construct: String, file: String, line: usize },
    #[error("{file}:{line}: `{name}` is not declared in module `{module}`")]
    UndeclaredIdentifier { name: String, module: String, file: String, line: usize },
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("elaboration failed: {0}")]
    Elaboration(String),
}

/// Preprocess and parse a set of files in one step.
pub fn load_design(files: &[SourceFile], dialect: Dialect) -> Result<DesignAst, FrontendError> {
    parse(&preprocess(files, dialect)?)
}
