//! Row-major dense matrices with instrumented arithmetic kernels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{BitMask, OpCounter};

/// Row count above which kernels split work across rows. Each output row is
/// computed sequentially by exactly one worker, so results are bitwise
/// identical to the single-threaded path.
const PAR_ROWS: usize = 256;

/// Dense real matrix, row-major, 64-bit entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape {
                op: "DenseMatrix::from_vec",
                detail: format!(
                    "{} values for a {rows}x{cols} matrix (need {})",
                    values.len(),
                    rows * cols
                ),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite entry {} at flat index {bad}",
                values[bad]
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// Build from a row-major closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.values[c * self.rows + r] = self.values[r * self.cols + c];
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Matrix product `self * other`.
    ///
    /// If a counter is supplied it is incremented by the analytic operation
    /// count of an n x d by d x f product: `n*d*f` multiplies and
    /// `n*(d-1)*f` additions, i.e. `2dfn - fn` FLOPs.
    pub fn matmul(&self, other: &Self, counter: Option<&mut OpCounter>) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "dense_matmul",
                detail: format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        if let Some(c) = counter {
            c.multiplies += (self.rows * self.cols * other.cols) as u64;
            c.additions += (self.rows * self.cols.saturating_sub(1) * other.cols) as u64;
        }
        let f = other.cols;
        let mut out = vec![0.0; self.rows * f];
        if self.rows == 0 || f == 0 {
            return Ok(Self {
                rows: self.rows,
                cols: f,
                values: out,
            });
        }
        let kernel = |i: usize, out_row: &mut [f64]| {
            let a_row = &self.values[i * self.cols..(i + 1) * self.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                // Skipped terms are exactly +/-0 against finite operands.
                if aik == 0.0 {
                    continue;
                }
                let b_row = &other.values[k * f..(k + 1) * f];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        };
        if self.rows >= PAR_ROWS {
            out.par_chunks_mut(f)
                .enumerate()
                .for_each(|(i, row)| kernel(i, row));
        } else {
            for (i, row) in out.chunks_mut(f).enumerate() {
                kernel(i, row);
            }
        }
        let result = Self {
            rows: self.rows,
            cols: f,
            values: out,
        };
        debug_assert!(result.all_finite(), "dense_matmul produced non-finite output");
        Ok(result)
    }

    /// Zero out entries where the mask is false.
    pub fn apply_mask(&self, mask: &BitMask) -> Result<Self> {
        if mask.rows() != self.rows || mask.cols() != self.cols {
            return Err(Error::Shape {
                op: "apply_mask",
                detail: format!(
                    "matrix {}x{} vs mask {}x{}",
                    self.rows,
                    self.cols,
                    mask.rows(),
                    mask.cols()
                ),
            });
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !mask.get(r, c) {
                    out.values[r * self.cols + c] = 0.0;
                }
            }
        }
        Ok(out)
    }

    pub fn relu(&self) -> Self {
        let values = self.values.iter().map(|&v| v.max(0.0)).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            values,
        }
    }

    /// Numerically stable per-row log-softmax: each output row `o` satisfies
    /// `sum(exp(o)) == 1` to within 1e-12.
    pub fn log_softmax_rows(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.rows {
            let row = &mut out.values[r * self.cols..(r + 1) * self.cols];
            if row.is_empty() {
                continue;
            }
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_sum = row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
            for v in row.iter_mut() {
                *v = *v - max - log_sum;
            }
        }
        out
    }
}

/// Gradient of relu: pass the incoming gradient where the pre-activation was
/// strictly positive, zero elsewhere.
pub fn relu_backward(grad: &DenseMatrix, pre_activation: &DenseMatrix) -> Result<DenseMatrix> {
    if grad.rows != pre_activation.rows || grad.cols != pre_activation.cols {
        return Err(Error::Shape {
            op: "relu_backward",
            detail: format!(
                "grad {}x{} vs pre-activation {}x{}",
                grad.rows, grad.cols, pre_activation.rows, pre_activation.cols
            ),
        });
    }
    let values = grad
        .values
        .iter()
        .zip(&pre_activation.values)
        .map(|(&g, &p)| if p > 0.0 { g } else { 0.0 })
        .collect();
    Ok(DenseMatrix {
        rows: grad.rows,
        cols: grad.cols,
        values,
    })
}
