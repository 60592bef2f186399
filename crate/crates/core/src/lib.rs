// SPDX-License-Identifier: Apache-2.0

//! Hardware Trojan detection from Verilog sources.
//!
//! Designs are turned into data-flow graphs ([`hdl`], [`graph`]) and
//! classified by a graph convolutional network with attention pooling
//! ([`gnn`]). [`pipeline`] wires the stages into corpus ingestion, training
//! and leave-one-family-out evaluation.

pub mod gnn;
pub mod graph;
pub mod hdl;
pub mod node;
pub mod pipeline;

pub use node::{Dialect, Label, NodeKind, Op};
