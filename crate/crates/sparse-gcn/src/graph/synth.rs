//! Seeded synthetic graph generators for property tests and fixtures.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::GraphDataset;
use crate::rng::{rng_for, Stream};
use crate::tensor::DenseMatrix;

const SYNTH_CLASSES: usize = 2;

/// Preferential-attachment graph: nodes arrive one at a time and attach to
/// `m_attach` distinct existing nodes with probability proportional to
/// degree. `m_attach = 1` yields a tree. Features are one-hot node ids and
/// labels are drawn uniformly from two classes with the same seed.
pub fn synth_barabasi_albert(n: usize, m_attach: usize, seed: u64) -> Result<GraphDataset> {
    if n == 0 || m_attach == 0 || m_attach >= n {
        return Err(Error::Config(format!(
            "preferential attachment needs 0 < m_attach < n, got n={n}, m_attach={m_attach}"
        )));
    }
    let mut rng = rng_for(seed, Stream::Synth);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity((n - m_attach) * m_attach);
    // Attachment endpoints, each node repeated once per incident edge; uniform
    // sampling from this list realizes degree-proportional selection.
    let mut endpoints: Vec<usize> = Vec::new();
    let mut targets: Vec<usize> = (0..m_attach).collect();
    for v in m_attach..n {
        for &t in &targets {
            pairs.push((v, t));
            endpoints.push(t);
        }
        endpoints.extend(std::iter::repeat(v).take(m_attach));
        if v + 1 < n {
            let mut next = std::collections::BTreeSet::new();
            while next.len() < m_attach {
                next.insert(endpoints[rng.gen_range(0..endpoints.len())]);
            }
            targets = next.into_iter().collect();
        }
    }
    finish_dataset(n, &pairs, seed)
}

/// Erdos-Renyi graph: each unordered node pair is an edge independently with
/// probability `p`.
pub fn synth_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<GraphDataset> {
    if n == 0 || !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!(
            "edge probability must lie in [0, 1] and n > 0, got n={n}, p={p}"
        )));
    }
    let mut rng = rng_for(seed, Stream::Synth);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                pairs.push((i, j));
            }
        }
    }
    finish_dataset(n, &pairs, seed)
}

fn finish_dataset(n: usize, pairs: &[(usize, usize)], seed: u64) -> Result<GraphDataset> {
    let mut label_rng = rng_for(seed, Stream::Labels);
    let labels: Vec<usize> = (0..n).map(|_| label_rng.gen_range(0..SYNTH_CLASSES)).collect();
    GraphDataset::from_parts(n, pairs, SYNTH_CLASSES)?
        .with_features(DenseMatrix::identity(n))?
        .with_labels(labels, SYNTH_CLASSES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ba_with_single_attachment_is_a_tree() {
        let ds = synth_barabasi_albert(5, 1, 7).unwrap();
        // 4 undirected edges stored in both directions.
        assert_eq!(ds.edges.len(), 8);
        // Connected: union-find over the 5 nodes.
        let mut parent: Vec<usize> = (0..5).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &ds.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        assert!((0..5).all(|i| find(&mut parent, i) == root));
    }

    #[test]
    fn ba_edge_count_and_determinism() {
        let a = synth_barabasi_albert(40, 3, 11).unwrap();
        let b = synth_barabasi_albert(40, 3, 11).unwrap();
        assert_eq!(a, b);
        // (n - m) * m undirected edges, both directions stored.
        assert_eq!(a.edges.len(), (40 - 3) * 3 * 2);
        let c = synth_barabasi_albert(40, 3, 12).unwrap();
        assert_ne!(a.edges, c.edges);
    }

    #[test]
    fn ba_invalid_parameters() {
        assert!(synth_barabasi_albert(5, 0, 1).is_err());
        assert!(synth_barabasi_albert(3, 3, 1).is_err());
    }

    #[test]
    fn er_extreme_probabilities() {
        let empty = synth_erdos_renyi(10, 0.0, 3).unwrap();
        assert!(empty.edges.is_empty());
        let full = synth_erdos_renyi(10, 1.0, 3).unwrap();
        assert_eq!(full.edges.len(), 45 * 2);
    }

    #[test]
    fn er_rejects_bad_probability() {
        assert!(synth_erdos_renyi(10, 1.5, 3).is_err());
        assert!(synth_erdos_renyi(0, 0.5, 3).is_err());
    }
}
