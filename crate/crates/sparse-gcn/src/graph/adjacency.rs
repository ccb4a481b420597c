//! Construction of the renormalized adjacency matrix.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::GraphDataset;
use crate::tensor::CsrMatrix;

/// Degree-normalized adjacency with self-loops: entry (i, j) of the
/// underlying CSR is `1 / sqrt(deg(i) * deg(j))` where `deg` counts the
/// self-loop, computed as `D^{-1/2} (I + A) D^{-1/2}`.
///
/// The diagonal entries are the added self-loops; they are exempt from
/// pruning, so every row keeps at least one entry and normalization never
/// divides by zero. Values are not recomputed after pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: CsrMatrix,
    /// Flat index into the CSR value array of each node's diagonal entry.
    self_loop_positions: Vec<usize>,
}

impl NormalizedAdjacency {
    /// Wrap a CSR matrix, checking that it is square, carries exactly one
    /// diagonal entry per node, and stores values in (0, 1].
    pub fn from_matrix(matrix: CsrMatrix) -> Result<Self> {
        if matrix.n_rows() != matrix.n_cols() {
            return Err(Error::Validation(format!(
                "adjacency must be square, got {}x{}",
                matrix.n_rows(),
                matrix.n_cols()
            )));
        }
        let mut self_loop_positions = Vec::with_capacity(matrix.n_rows());
        let mut flat = 0usize;
        for r in 0..matrix.n_rows() {
            let mut diag = None;
            for (c, v) in matrix.row_iter(r) {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::Validation(format!(
                        "adjacency value {v} at ({r},{c}) outside (0, 1]"
                    )));
                }
                if c == r {
                    diag = Some(flat);
                }
                flat += 1;
            }
            match diag {
                Some(p) => self_loop_positions.push(p),
                None => {
                    return Err(Error::Validation(format!("node {r} lost its self-loop")));
                }
            }
        }
        Ok(Self {
            matrix,
            self_loop_positions,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    /// Flat value-array indices of the diagonal entries.
    pub fn self_loop_positions(&self) -> &[usize] {
        &self.self_loop_positions
    }

    /// Off-diagonal nonzero count (the prunable pool).
    pub fn off_diagonal_nnz(&self) -> usize {
        self.matrix.nnz() - self.self_loop_positions.len()
    }

    /// Histogram of structural nonzeros per row.
    pub fn degree_histogram(&self, exclude_self_loops: bool) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for r in 0..self.n() {
            let mut deg = self.matrix.row_nnz(r);
            if exclude_self_loops && self.matrix.get(r, r).is_some() {
                deg -= 1;
            }
            *hist.entry(deg).or_insert(0) += 1;
        }
        hist
    }

    /// Largest per-row structural nonzero count.
    pub fn max_degree(&self, exclude_self_loops: bool) -> usize {
        self.degree_histogram(exclude_self_loops)
            .keys()
            .next_back()
            .copied()
            .unwrap_or(0)
    }
}

/// Build `D^{-1/2} (I + A) D^{-1/2}` for the dataset's edge list, where the
/// degree of node i counts its self-loop plus its neighbors.
pub fn build_normalized_adjacency(dataset: &GraphDataset) -> NormalizedAdjacency {
    let n = dataset.n_nodes;
    let mut degree = vec![1.0f64; n]; // self-loop contributes 1 to every row sum
    for &(src, _) in &dataset.edges {
        degree[src] += 1.0;
    }
    let mut triplets = Vec::with_capacity(dataset.edges.len() + n);
    for i in 0..n {
        triplets.push((i, i, 1.0 / degree[i]));
    }
    for &(src, dst) in &dataset.edges {
        triplets.push((src, dst, 1.0 / (degree[src] * degree[dst]).sqrt()));
    }
    let matrix = CsrMatrix::from_triplets(n, n, &triplets)
        .expect("validated dataset edges produce a valid CSR");
    NormalizedAdjacency::from_matrix(matrix).expect("construction satisfies the invariants")
}
