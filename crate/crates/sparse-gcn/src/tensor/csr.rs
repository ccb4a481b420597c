//! Compressed sparse row matrices and the sparse-dense product.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::dense::DenseMatrix;
use crate::tensor::OpCounter;

const PAR_ROWS: usize = 256;

/// CSR matrix. Column indices are strictly increasing within each row and no
/// explicit zeros are stored: pruning removes entries structurally, so `nnz`
/// is always the true nonzero count.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build from (row, col, value) triplets. Entries are sorted internally;
    /// duplicate positions are rejected and zero values are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::Validation(format!(
                    "entry ({r},{c}) outside {n_rows}x{n_cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Validation(format!("non-finite value at ({r},{c})")));
            }
            if v != 0.0 {
                entries.push((r, c, v));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::Validation(format!(
                    "duplicate entry at ({},{})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.iter().map(|&(_, c, _)| c).collect();
        let values = entries.iter().map(|&(_, _, v)| v).collect();
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    /// Nonzeros of row `r` as (column, value) pairs, columns ascending.
    pub fn row_iter(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = self.row_ptr[r];
        let end = self.row_ptr[r + 1];
        self.col_idx[start..end]
            .iter()
            .zip(&self.values[start..end])
            .map(|(&c, &v)| (c, v))
    }

    /// All nonzeros as (row, col, value), row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row_iter(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let start = self.row_ptr[r];
        let end = self.row_ptr[r + 1];
        self.col_idx[start..end]
            .binary_search(&c)
            .ok()
            .map(|i| self.values[start + i])
    }

    /// Exact transpose in canonical CSR form (counting sort, O(nnz + n)).
    pub fn transpose(&self) -> Self {
        let nnz = self.nnz();
        let mut row_ptr = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0f64; nnz];
        let mut cursor = row_ptr[..self.n_cols].to_vec();
        // Rows visited in ascending order, so each output row ends up with
        // ascending column indices.
        for r in 0..self.n_rows {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[idx];
                let pos = cursor[c];
                col_idx[pos] = r;
                values[pos] = self.values[idx];
                cursor[c] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse-dense product `self * b`.
    ///
    /// Counter increments are structural: `nnz * f` multiplies and
    /// `sum_rows max(row_nnz - 1, 0) * f` additions, which equals
    /// `(nnz - n_rows) * f` when every row is nonempty.
    pub fn spmm(&self, b: &DenseMatrix, counter: Option<&mut OpCounter>) -> Result<DenseMatrix> {
        if self.n_cols != b.rows() {
            return Err(Error::Shape {
                op: "spmm",
                detail: format!(
                    "{}x{} times {}x{}",
                    self.n_rows,
                    self.n_cols,
                    b.rows(),
                    b.cols()
                ),
            });
        }
        let f = b.cols();
        if let Some(c) = counter {
            c.multiplies += (self.nnz() * f) as u64;
            let adds: usize = (0..self.n_rows)
                .map(|r| self.row_nnz(r).saturating_sub(1) * f)
                .sum();
            c.additions += adds as u64;
        }
        let mut out = vec![0.0f64; self.n_rows * f];
        if self.n_rows == 0 || f == 0 {
            return Ok(DenseMatrix::from_vec(self.n_rows, f, out).expect("zero-sized"));
        }
        let kernel = |i: usize, out_row: &mut [f64]| {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.values[idx];
                let b_row = b.row(self.col_idx[idx]);
                for (o, &x) in out_row.iter_mut().zip(b_row) {
                    *o += v * x;
                }
            }
        };
        if self.n_rows >= PAR_ROWS {
            out.par_chunks_mut(f)
                .enumerate()
                .for_each(|(i, row)| kernel(i, row));
        } else {
            for (i, row) in out.chunks_mut(f).enumerate() {
                kernel(i, row);
            }
        }
        let result = DenseMatrix::from_vec(self.n_rows, f, out)?;
        Ok(result)
    }

    /// Rebuild without the entries at the given (row, col) positions.
    /// Positions absent from the matrix are ignored.
    pub fn remove_positions(&self, remove: &std::collections::BTreeSet<(usize, usize)>) -> Self {
        let triplets: Vec<(usize, usize, f64)> = self
            .iter()
            .filter(|&(r, c, _)| !remove.contains(&(r, c)))
            .collect();
        Self::from_triplets(self.n_rows, self.n_cols, &triplets)
            .expect("filtered entries of a valid matrix stay valid")
    }

    /// Check the CSR structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.n_rows + 1
            || self.row_ptr[0] != 0
            || *self.row_ptr.last().unwrap() != self.nnz()
        {
            return Err(Error::Validation("row_ptr bounds are inconsistent".into()));
        }
        for r in 0..self.n_rows {
            if self.row_ptr[r] > self.row_ptr[r + 1] {
                return Err(Error::Validation(format!("row_ptr decreases at row {r}")));
            }
            let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Validation(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
            if let Some(&last) = cols.last() {
                if last >= self.n_cols {
                    return Err(Error::Validation(format!("column out of range in row {r}")));
                }
            }
        }
        if self.values.iter().any(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::Validation(
                "stored value is zero or non-finite".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn two_by_two_half() -> CsrMatrix {
        CsrMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn spmm_counts_per_nonzero() {
        let a = two_by_two_half();
        let b = DenseMatrix::identity(2);
        let mut c = OpCounter::new();
        let out = a.spmm(&b, Some(&mut c)).unwrap();
        assert_eq!(out.values(), &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(c.multiplies, 8);
        assert_eq!(c.additions, 4);
        assert_eq!(c.flops(), 12);
    }

    #[test]
    fn empty_row_contributes_nothing() {
        // Row 1 has no entries.
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        let b = DenseMatrix::from_vec(2, 2, vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut c = OpCounter::new();
        let out = a.spmm(&b, Some(&mut c)).unwrap();
        assert_eq!(out.row(1), &[0.0, 0.0]);
        assert_eq!(c.flops(), 2); // one nonzero times two columns, no additions
    }

    #[test]
    fn identity_spmm_counts_no_additions() {
        let a = CsrMatrix::identity(3);
        let b = DenseMatrix::from_fn(3, 2, |r, c| (r + c) as f64 + 1.0);
        let mut c = OpCounter::new();
        let out = a.spmm(&b, Some(&mut c)).unwrap();
        assert_eq!(out, b);
        assert_eq!(c.multiplies, 6);
        assert_eq!(c.additions, 0);
    }

    #[test]
    fn spmm_shape_mismatch_is_error() {
        let a = CsrMatrix::identity(3);
        let b = DenseMatrix::zeros(2, 2);
        assert!(matches!(a.spmm(&b, None), Err(Error::Shape { .. })));
    }

    #[test]
    fn transpose_identity_and_single_entry() {
        let id = CsrMatrix::identity(4);
        assert_eq!(id.transpose(), id);

        let single = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.5)]).unwrap();
        let t = single.transpose();
        assert_eq!(t.get(1, 0), Some(2.5));
        assert_eq!(t.nnz(), 1);
    }

    #[test]
    fn duplicate_triplets_rejected() {
        let r = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn zero_values_dropped() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 0.0), (1, 1, 3.0)]).unwrap();
        assert_eq!(m.nnz(), 1);
        m.validate().unwrap();
    }

    #[test]
    fn remove_positions_rebuilds() {
        let a = two_by_two_half();
        let mut rm = BTreeSet::new();
        rm.insert((0, 1));
        rm.insert((1, 0));
        let out = a.remove_positions(&rm);
        assert_eq!(out.nnz(), 2);
        assert_eq!(out.get(0, 0), Some(0.5));
        assert_eq!(out.get(0, 1), None);
        out.validate().unwrap();
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn random_csr(seed: u64, n: usize) -> CsrMatrix {
            let mut rng = crate::rng::rng_from_seed(seed);
            let mut triplets = Vec::new();
            for r in 0..n {
                for c in 0..n {
                    if rng.gen_bool(0.3) {
                        triplets.push((r, c, rng.gen_range(0.1..2.0)));
                    }
                }
            }
            CsrMatrix::from_triplets(n, n, &triplets).unwrap()
        }

        proptest! {
            #[test]
            fn double_transpose_is_identity(seed in 0u64..500) {
                let a = random_csr(seed, 5);
                prop_assert_eq!(a.transpose().transpose(), a);
            }

            // Bitwise: the double transpose restores the exact arrays, so
            // spmm over it matches spmm over the original exactly.
            #[test]
            fn spmm_after_double_transpose_is_bitwise_equal(seed in 0u64..200) {
                let a = random_csr(seed, 6);
                let mut rng = crate::rng::rng_from_seed(seed ^ 0xabcd);
                let b = DenseMatrix::from_fn(6, 3, |_, _| rng.gen_range(-1.0..1.0));
                let x = a.spmm(&b, None).unwrap();
                let y = a.transpose().transpose().spmm(&b, None).unwrap();
                prop_assert_eq!(x.values(), y.values());
            }

            // With every row nonempty the counted FLOPs collapse to 2*nnz*f - n*f.
            #[test]
            fn full_row_flops_formula(seed in 0u64..200) {
                let n = 5usize;
                let mut rng = crate::rng::rng_from_seed(seed);
                let mut triplets: Vec<(usize, usize, f64)> = (0..n)
                    .map(|r| (r, rng.gen_range(0..n), rng.gen_range(0.1..1.0)))
                    .collect();
                for r in 0..n {
                    for c in 0..n {
                        if rng.gen_bool(0.25) && !triplets.iter().any(|t| t.0 == r && t.1 == c) {
                            triplets.push((r, c, rng.gen_range(0.1..1.0)));
                        }
                    }
                }
                let a = CsrMatrix::from_triplets(n, n, &triplets).unwrap();
                let b = DenseMatrix::from_fn(n, 4, |_, _| rng.gen_range(-1.0..1.0));
                let mut counter = OpCounter::new();
                a.spmm(&b, Some(&mut counter)).unwrap();
                prop_assert_eq!(counter.flops(), (2 * a.nnz() * 4 - n * 4) as u64);
            }
        }
    }
}
