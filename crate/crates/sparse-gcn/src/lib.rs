//! Training and triple sparsification of two-layer graph convolutional
//! networks, with exact MAC/FLOP cost accounting.
//!
//! The crate trains a GCN for node classification, prunes the normalized
//! adjacency matrix, the weight matrices, and the hidden embedding matrix
//! with four selectable techniques, re-trains between rounds, and
//! cross-checks the measured operation counts against analytic bounds.

pub mod error;
pub mod graph;
pub mod model;
pub mod pruning;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
