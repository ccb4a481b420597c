//! Exact floating-point-operation accounting.

/// Tally of scalar multiplies and additions performed by the matrix kernels.
///
/// Counts are defined analytically from operand shapes and sparsity
/// structure, never from instruction-level tracing, so they are independent
/// of kernel-internal shortcuts (zero skipping, parallel row splits).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCounter {
    pub multiplies: u64,
    pub additions: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn flops(&self) -> u64 {
        self.multiplies + self.additions
    }

    /// Multiply-accumulate count: FLOPs / 2, rounded down.
    pub fn macs(&self) -> u64 {
        self.flops() / 2
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}
