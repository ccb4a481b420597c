//! Dense and CSR matrix types plus the exact arithmetic kernels used by the
//! model. Every kernel optionally reports its operation count through an
//! [`OpCounter`]; counting is opt-in per call so ordinary training runs pay
//! no accounting overhead.

mod counter;
mod csr;
mod dense;
mod mask;

pub use counter::OpCounter;
pub use csr::CsrMatrix;
pub use dense::{relu_backward, DenseMatrix};
pub use mask::BitMask;
