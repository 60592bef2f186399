// SPDX-License-Identifier: Apache-2.0

use ndarray::Array2;

use super::vocab::Vocabulary;
use super::{DataFlowGraph, GraphError};

/// One-hot node features, stored as the hot column of each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    pub dim: usize,
    pub hot: Vec<usize>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.hot.len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut x = Array2::zeros((self.hot.len(), self.dim));
        for (i, &c) in self.hot.iter().enumerate() {
            x[[i, c]] = 1.0;
        }
        x
    }
}

/// |V| x D one-hot matrix of node tags, D being the dialect's vocabulary size.
pub fn encode_features(g: &DataFlowGraph) -> Result<FeatureMatrix, GraphError> {
    let dim = Vocabulary::for_dialect(g.dialect).len();
    let hot = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| match n.tag {
            Some(t) if (t.index as usize) < dim => Ok(t.index as usize),
            _ => Err(GraphError::UntaggedNode(i)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix { dim, hot })
}
