// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Symmetric normalized adjacency `D^-1/2 (A + I) D^-1/2`.
    ///
    /// Direction is ignored: an edge in either direction connects both
    /// endpoints. Self-loop edges in the input are absorbed by `I`.
    pub fn normalized(n: usize, edges: &[(usize, usize)]) -> Csr {
        let mut nbrs: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &(s, d) in edges {
            if s != d {
                nbrs[s].push(d);
                nbrs[d].push(s);
            }
        }
        for row in &mut nbrs {
            row.sort_unstable();
            row.dedup();
        }
        let deg: Vec<usize> = nbrs.iter().map(Vec::len).collect();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (i, row) in nbrs.iter().enumerate() {
            for &j in row {
                indices.push(j);
                values.push(1.0 / ((deg[i] * deg[j]) as f64).sqrt());
            }
            indptr.push(indices.len());
        }
        Csr { n, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    /// `self * x` for a dense matrix.
    pub fn matmul(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, x.ncols()));
        for i in 0..self.n {
            let mut row = out.row_mut(i);
            for (j, v) in self.row(i) {
                row.scaled_add(v, &x.row(j));
            }
        }
        out
    }

    /// `self * v` for a dense vector.
    pub fn matvec(&self, v: ArrayView1<f64>) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|i| self.row(i).map(|(j, a)| a * v[j]).sum()))
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn induced(&self, keep: &[usize]) -> Csr {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            pos[i] = k;
        }
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &i in keep {
            let mut row: Vec<(usize, f64)> =
                self.row(i).filter(|&(j, _)| pos[j] != usize::MAX).map(|(j, v)| (pos[j], v)).collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Csr { n: keep.len(), indptr, indices, values }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[[i, j]] = v;
            }
        }
        a
    }
}
