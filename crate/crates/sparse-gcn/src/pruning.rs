//! Sparsification: selecting nonzero entries to remove from the adjacency
//! matrix (structurally) or from a dense matrix (by clearing mask bits).
//!
//! Four techniques are supported:
//! - random: a uniform sample of the nonzero pool;
//! - global magnitude: the globally smallest absolute values;
//! - top-k per row: the k smallest absolute values of every row;
//! - sensitivity: every value below `lambda * sigma`, with `sigma` the
//!   sample standard deviation of the pool (weight matrices only).
//!
//! Selection quotas round half away from zero. Ties on absolute value break
//! by (row, col) ascending, so selections are fully deterministic.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::rng::{rng_for, Stream};
use crate::tensor::{BitMask, DenseMatrix};

/// A candidate nonzero: its position and current value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

pub type Position = (usize, usize);

/// Selection technique with its one technique-specific parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "technique", rename_all = "kebab-case")]
pub enum Technique {
    Random { percent: f64, seed: u64 },
    GlobalMagnitude { percent: f64 },
    TopKPerRow { k: usize },
    Sensitivity { lambda: f64 },
}

/// Which matrix a prune spec applies to. Layers are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum PruneTarget {
    Adjacency,
    Weight { layer: usize },
    Embedding { layer: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneSpec {
    #[serde(flatten)]
    pub technique: Technique,
    #[serde(flatten)]
    pub target: PruneTarget,
}

/// What one pruning application actually did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub entries_removed: usize,
    /// Fraction of this call's candidate pool that was removed.
    pub achieved_sparsity: f64,
    /// Magnitude cut for the threshold-style techniques.
    pub threshold_used: Option<f64>,
    /// True when the requested quota exceeded the pool and was reduced.
    pub clamped: bool,
}

fn quota(percent: f64, pool: usize) -> Result<usize> {
    if !(0.0..=100.0).contains(&percent) {
        return Err(Error::Config(format!(
            "prune percentage {percent} outside [0, 100]"
        )));
    }
    // Round half away from zero; the operand is non-negative.
    Ok((percent / 100.0 * pool as f64 + 0.5).floor() as usize)
}

/// Uniform sample of `round(p% * pool)` positions, without replacement.
pub fn prune_random(pool: &[MatrixEntry], percent: f64, seed: u64) -> Result<Vec<Position>> {
    let q = quota(percent, pool.len())?;
    let mut order: Vec<Position> = pool.iter().map(|e| (e.row, e.col)).collect();
    order.shuffle(&mut rng_for(seed, Stream::Prune));
    order.truncate(q);
    order.sort_unstable();
    Ok(order)
}

fn magnitude_order(pool: &[MatrixEntry]) -> Vec<Position> {
    let mut order: Vec<&MatrixEntry> = pool.iter().collect();
    order.sort_by(|a, b| {
        a.value
            .abs()
            .total_cmp(&b.value.abs())
            .then(a.row.cmp(&b.row))
            .then(a.col.cmp(&b.col))
    });
    order.into_iter().map(|e| (e.row, e.col)).collect()
}

/// The `round(p% * pool)` entries with the smallest absolute values.
pub fn prune_global_magnitude(pool: &[MatrixEntry], percent: f64) -> Result<Vec<Position>> {
    let q = quota(percent, pool.len())?;
    let mut selected = magnitude_order(pool);
    selected.truncate(q);
    selected.sort_unstable();
    Ok(selected)
}

/// Per row, the `min(k, row_nnz)` entries with the smallest absolute values.
pub fn prune_topk_per_row(pool: &[MatrixEntry], k: usize) -> Vec<Position> {
    let mut by_row: std::collections::BTreeMap<usize, Vec<&MatrixEntry>> = Default::default();
    for e in pool {
        by_row.entry(e.row).or_default().push(e);
    }
    let mut selected = Vec::new();
    for (_, mut entries) in by_row {
        entries.sort_by(|a, b| a.value.abs().total_cmp(&b.value.abs()).then(a.col.cmp(&b.col)));
        selected.extend(entries.iter().take(k).map(|e| (e.row, e.col)));
    }
    selected.sort_unstable();
    selected
}

/// All entries with `|value| < lambda * sigma`, where `sigma` is the sample
/// standard deviation (divisor n-1) of the pool values. Returns the
/// threshold alongside the positions.
pub fn prune_sensitivity(pool: &[MatrixEntry], lambda: f64) -> Result<(Vec<Position>, f64)> {
    if lambda <= 0.0 {
        return Err(Error::Config(format!(
            "sensitivity scaling factor must be positive, got {lambda}"
        )));
    }
    if pool.len() < 2 {
        return Err(Error::Degenerate(format!(
            "sensitivity pruning needs at least 2 nonzero entries, got {}",
            pool.len()
        )));
    }
    let n = pool.len() as f64;
    let mean = pool.iter().map(|e| e.value).sum::<f64>() / n;
    let var = pool.iter().map(|e| (e.value - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let threshold = lambda * var.sqrt();
    let mut selected: Vec<Position> = pool
        .iter()
        .filter(|e| e.value.abs() < threshold)
        .map(|e| (e.row, e.col))
        .collect();
    selected.sort_unstable();
    Ok((selected, threshold))
}

/// Walk `order`, selecting until `quota` entries are chosen. With pairing
/// enabled, selecting (i, j) also selects a surviving (j, i), both counting
/// toward the quota; an odd quota can therefore split one final pair.
fn take_with_pairing(
    order: &[Position],
    pool: &BTreeSet<Position>,
    quota: usize,
    pairing: bool,
) -> BTreeSet<Position> {
    let mut selected = BTreeSet::new();
    for &pos in order {
        if selected.len() >= quota {
            break;
        }
        if selected.insert(pos) && pairing {
            let mirror = (pos.1, pos.0);
            if mirror != pos && pool.contains(&mirror) && selected.len() < quota {
                selected.insert(mirror);
            }
        }
    }
    selected
}

/// Prune off-diagonal entries of the normalized adjacency by the spec's
/// technique over the stored (normalized) values. Self-loops are never
/// candidates and the surviving values are not renormalized. With
/// `symmetric_pairing`, removals take the mirror entry too.
pub fn prune_adjacency(
    adj: &NormalizedAdjacency,
    spec: &PruneSpec,
    symmetric_pairing: bool,
) -> Result<(NormalizedAdjacency, PruneOutcome)> {
    if spec.target != PruneTarget::Adjacency {
        return Err(Error::Contract {
            op: "prune_adjacency",
            detail: format!("spec targets {:?}", spec.target),
        });
    }
    let pool: Vec<MatrixEntry> = adj
        .matrix()
        .iter()
        .filter(|&(r, c, _)| r != c)
        .map(|(row, col, value)| MatrixEntry { row, col, value })
        .collect();
    let pool_positions: BTreeSet<Position> = pool.iter().map(|e| (e.row, e.col)).collect();

    let mut threshold = None;
    let mut clamped = false;
    let selected: BTreeSet<Position> = match spec.technique {
        Technique::Random { percent, seed } => {
            let q = quota(percent, pool.len())?.min(pool.len());
            let mut order: Vec<Position> = pool_positions.iter().copied().collect();
            order.shuffle(&mut rng_for(seed, Stream::Prune));
            take_with_pairing(&order, &pool_positions, q, symmetric_pairing)
        }
        Technique::GlobalMagnitude { percent } => {
            let q = quota(percent, pool.len())?.min(pool.len());
            let order = magnitude_order(&pool);
            let sel = take_with_pairing(&order, &pool_positions, q, symmetric_pairing);
            threshold = sel
                .iter()
                .filter_map(|&(r, c)| adj.matrix().get(r, c))
                .map(f64::abs)
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
            sel
        }
        Technique::TopKPerRow { k } => {
            let mut sel: BTreeSet<Position> =
                prune_topk_per_row(&pool, k).into_iter().collect();
            if symmetric_pairing {
                let mirrors: Vec<Position> = sel
                    .iter()
                    .map(|&(r, c)| (c, r))
                    .filter(|m| pool_positions.contains(m))
                    .collect();
                sel.extend(mirrors);
            }
            sel
        }
        Technique::Sensitivity { .. } => {
            return Err(Error::Config(
                "sensitivity pruning is defined for weight matrices only".into(),
            ));
        }
    };
    if let Technique::Random { percent, .. } | Technique::GlobalMagnitude { percent } =
        spec.technique
    {
        clamped = quota(percent, pool.len())? > pool.len();
    }

    let pruned = adj.matrix().remove_positions(&selected);
    let outcome = PruneOutcome {
        entries_removed: selected.len(),
        achieved_sparsity: if pool.is_empty() {
            0.0
        } else {
            selected.len() as f64 / pool.len() as f64
        },
        threshold_used: threshold,
        clamped,
    };
    Ok((NormalizedAdjacency::from_matrix(pruned)?, outcome))
}

/// Clear mask bits selected by the spec's technique over the backing values
/// at currently-true positions. Bits only ever turn off, so repeated calls
/// compound.
pub fn prune_mask(
    mask: &BitMask,
    backing: &DenseMatrix,
    spec: &PruneSpec,
) -> Result<(BitMask, PruneOutcome)> {
    match spec.target {
        PruneTarget::Weight { .. } => {}
        PruneTarget::Embedding { .. } => {
            if matches!(spec.technique, Technique::Sensitivity { .. }) {
                return Err(Error::Config(
                    "sensitivity pruning is defined for weight matrices only".into(),
                ));
            }
        }
        PruneTarget::Adjacency => {
            return Err(Error::Contract {
                op: "prune_mask",
                detail: "spec targets the adjacency matrix".into(),
            });
        }
    }
    if mask.rows() != backing.rows() || mask.cols() != backing.cols() {
        return Err(Error::Shape {
            op: "prune_mask",
            detail: format!(
                "mask {}x{} vs backing {}x{}",
                mask.rows(),
                mask.cols(),
                backing.rows(),
                backing.cols()
            ),
        });
    }
    let pool: Vec<MatrixEntry> = mask
        .iter_true()
        .map(|(row, col)| MatrixEntry {
            row,
            col,
            value: backing.get(row, col),
        })
        .collect();

    let mut threshold = None;
    let selected: Vec<Position> = match spec.technique {
        Technique::Random { percent, seed } => prune_random(&pool, percent, seed)?,
        Technique::GlobalMagnitude { percent } => {
            let sel = prune_global_magnitude(&pool, percent)?;
            threshold = sel
                .iter()
                .map(|&(r, c)| backing.get(r, c).abs())
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
            sel
        }
        Technique::TopKPerRow { k } => prune_topk_per_row(&pool, k),
        Technique::Sensitivity { lambda } => {
            let (sel, t) = prune_sensitivity(&pool, lambda)?;
            threshold = Some(t);
            sel
        }
    };

    let mut out = mask.clone();
    for &(r, c) in &selected {
        out.set(r, c, false);
    }
    let outcome = PruneOutcome {
        entries_removed: selected.len(),
        achieved_sparsity: if pool.is_empty() {
            0.0
        } else {
            selected.len() as f64 / pool.len() as f64
        },
        threshold_used: threshold,
        clamped: false,
    };
    Ok((out, outcome))
}
