//! Graph datasets, normalized adjacency construction, splits, and synthetic
//! generators.

mod adjacency;
mod dataset;
mod synth;

pub use adjacency::{build_normalized_adjacency, NormalizedAdjacency};
pub use dataset::{
    load_dataset, load_dataset_dir, make_planetoid_split, GraphDataset, Split, SplitSpec,
};
pub use synth::{synth_barabasi_albert, synth_erdos_renyi};
