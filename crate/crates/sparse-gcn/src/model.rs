//! Two-layer graph convolutional network: forward pass, negative
//! log-likelihood loss, analytic backward pass with mask-gated gradients,
//! and Adam updates.
//!
//! Each layer computes `act(A_hat * H * W)` with the weight and embedding
//! matrices gated by binary masks. Masked weight entries stay exactly 0.0
//! through every optimizer step; masked embedding positions contribute zero
//! in the forward pass and receive zero gradient.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::rng::{rng_for, Stream};
use crate::tensor::{relu_backward, BitMask, CsrMatrix, DenseMatrix, OpCounter};

/// Shape parameters of a model instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub in_dim: usize,
    pub hidden_dim: usize,
    pub n_classes: usize,
    pub n_nodes: usize,
}

/// Which way a layer's two products are associated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatmulOrder {
    /// `A_hat * (H * W)`: the dense product first. Cheaper when the input
    /// dimension exceeds the output dimension.
    DenseFirst,
    /// `(A_hat * H) * W`: aggregate over the graph first.
    SpmmFirst,
}

/// Adam hyper-parameters; defaults match common full-batch GCN training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// First/second moment estimates per weight matrix plus the shared step
/// counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_w1: DenseMatrix,
    pub v_w1: DenseMatrix,
    pub m_w2: DenseMatrix,
    pub v_w2: DenseMatrix,
    pub step: u64,
}

impl AdamState {
    fn zeroed(dims: &ModelDims) -> Self {
        Self {
            m_w1: DenseMatrix::zeros(dims.in_dim, dims.hidden_dim),
            v_w1: DenseMatrix::zeros(dims.in_dim, dims.hidden_dim),
            m_w2: DenseMatrix::zeros(dims.hidden_dim, dims.n_classes),
            v_w2: DenseMatrix::zeros(dims.hidden_dim, dims.n_classes),
            step: 0,
        }
    }
}

/// The model: two weight matrices, their masks, the interior embedding mask,
/// and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    pub w1: DenseMatrix,
    pub w2: DenseMatrix,
    pub mask_w1: BitMask,
    pub mask_w2: BitMask,
    /// Gates the post-activation hidden embedding, one row per node.
    pub mask_h1: BitMask,
    pub adam: AdamState,
    pub hidden_dim: usize,
}

impl GcnModel {
    pub fn dims(&self) -> ModelDims {
        ModelDims {
            in_dim: self.w1.rows(),
            hidden_dim: self.hidden_dim,
            n_classes: self.w2.cols(),
            n_nodes: self.mask_h1.rows(),
        }
    }

    /// Total weight parameter count (no bias terms).
    pub fn param_count(&self) -> usize {
        self.w1.rows() * self.w1.cols() + self.w2.rows() * self.w2.cols()
    }

    /// Re-zero every masked weight entry. Gradient gating keeps Adam moments
    /// at zero for masked positions, so this is a backstop rather than a
    /// correction.
    pub fn enforce_masks(&mut self) {
        self.w1 = self.w1.apply_mask(&self.mask_w1).expect("shapes match");
        self.w2 = self.w2.apply_mask(&self.mask_w2).expect("shapes match");
    }

    /// Reset optimizer moments and step counter.
    pub fn reset_adam(&mut self) {
        self.adam = AdamState::zeroed(&self.dims());
    }
}

/// Glorot-uniform initialization with all-true masks and zeroed Adam state.
/// Deterministic for a fixed seed.
pub fn init_weights(dims: ModelDims, seed: u64) -> GcnModel {
    let mut rng = rng_for(seed, Stream::WeightInit);
    let mut glorot = |fan_in: usize, fan_out: usize| {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        DenseMatrix::from_fn(fan_in, fan_out, |_, _| rng.gen_range(-bound..bound))
    };
    let w1 = glorot(dims.in_dim, dims.hidden_dim);
    let w2 = glorot(dims.hidden_dim, dims.n_classes);
    GcnModel {
        w1,
        w2,
        mask_w1: BitMask::all_true(dims.in_dim, dims.hidden_dim),
        mask_w2: BitMask::all_true(dims.hidden_dim, dims.n_classes),
        mask_h1: BitMask::all_true(dims.n_nodes, dims.hidden_dim),
        adam: AdamState::zeroed(&dims),
        hidden_dim: dims.hidden_dim,
    }
}

/// Analytic FLOPs of `A_hat * (H * W)` vs `(A_hat * H) * W` for an n x d
/// input and d x f weight; both orders share the dense `2dfn - fn` term and
/// differ in the sparse product's column count.
fn order_flops(adj: &CsrMatrix, n: usize, d: usize, f: usize) -> (u64, u64) {
    let spmm = |cols: usize| -> u64 {
        let mult = (adj.nnz() * cols) as u64;
        let adds: usize = (0..adj.n_rows())
            .map(|r| adj.row_nnz(r).saturating_sub(1) * cols)
            .sum();
        mult + adds as u64
    };
    let dense = (2 * n * d * f).saturating_sub(n * f) as u64;
    (dense + spmm(f), spmm(d) + dense)
}

/// Pick the cheaper association for a layer; ties go to aggregate-first.
pub fn choose_order(adj: &CsrMatrix, n: usize, d: usize, f: usize) -> MatmulOrder {
    let (dense_first, spmm_first) = order_flops(adj, n, d, f);
    if dense_first < spmm_first {
        MatmulOrder::DenseFirst
    } else {
        MatmulOrder::SpmmFirst
    }
}

/// One layer's linear part `A_hat * input * weight` in the given order.
pub fn layer_output(
    adj: &CsrMatrix,
    input: &DenseMatrix,
    weight: &DenseMatrix,
    order: MatmulOrder,
    mut counter: Option<&mut OpCounter>,
) -> Result<DenseMatrix> {
    match order {
        MatmulOrder::DenseFirst => {
            let t = input.matmul(weight, counter.as_deref_mut())?;
            adj.spmm(&t, counter)
        }
        MatmulOrder::SpmmFirst => {
            let t = adj.spmm(input, counter.as_deref_mut())?;
            t.matmul(weight, counter)
        }
    }
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Pre-activation of the hidden layer.
    pub pre1: DenseMatrix,
    /// `apply_mask(relu(pre1), mask_h1)`, exactly.
    pub h1: DenseMatrix,
    pub logits: DenseMatrix,
    pub log_probs: DenseMatrix,
    pub order1: MatmulOrder,
    pub order2: MatmulOrder,
}

pub fn forward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    mut counter: Option<&mut OpCounter>,
) -> Result<ForwardCache> {
    let dims = model.dims();
    if x.rows() != adj.n() || x.cols() != dims.in_dim || adj.n() != dims.n_nodes {
        return Err(Error::Shape {
            op: "forward",
            detail: format!(
                "features {}x{}, adjacency {} nodes, model expects {}x{}",
                x.rows(),
                x.cols(),
                adj.n(),
                dims.n_nodes,
                dims.in_dim
            ),
        });
    }
    let a = adj.matrix();
    let w1m = model.w1.apply_mask(&model.mask_w1)?;
    let w2m = model.w2.apply_mask(&model.mask_w2)?;

    let order1 = choose_order(a, dims.n_nodes, dims.in_dim, dims.hidden_dim);
    let pre1 = layer_output(a, x, &w1m, order1, counter.as_deref_mut())?;
    let h1 = pre1.relu().apply_mask(&model.mask_h1)?;

    let order2 = choose_order(a, dims.n_nodes, dims.hidden_dim, dims.n_classes);
    let logits = layer_output(a, &h1, &w2m, order2, counter)?;
    let log_probs = logits.log_softmax_rows();

    Ok(ForwardCache {
        pre1,
        h1,
        logits,
        log_probs,
        order1,
        order2,
    })
}

/// Mean negative log-likelihood over the given nodes.
pub fn nll_loss(log_probs: &DenseMatrix, labels: &[usize], node_set: &[usize]) -> Result<f64> {
    if node_set.is_empty() {
        return Err(Error::Config("loss over an empty node set".into()));
    }
    let mut sum = 0.0;
    for &i in node_set {
        sum -= log_probs.get(i, labels[i]);
    }
    Ok(sum / node_set.len() as f64)
}

/// Gradients of the loss with respect to the two weight matrices. Masked
/// positions are exactly 0.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: DenseMatrix,
    pub w2: DenseMatrix,
}

/// Backward pass from a cache produced by [`forward`] on the same inputs.
pub fn backward(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    cache: &ForwardCache,
    labels: &[usize],
    node_set: &[usize],
) -> Result<Gradients> {
    backward_with(
        model,
        &adj.matrix().transpose(),
        &x.transpose(),
        cache,
        labels,
        node_set,
    )
}

/// Backward pass taking pre-transposed operands, so per-epoch callers can
/// compute `A_hat^T` and `X^T` once.
pub fn backward_with(
    model: &GcnModel,
    adj_t: &CsrMatrix,
    x_t: &DenseMatrix,
    cache: &ForwardCache,
    labels: &[usize],
    node_set: &[usize],
) -> Result<Gradients> {
    let dims = model.dims();
    let n = dims.n_nodes;
    let stale = cache.log_probs.rows() != n
        || cache.log_probs.cols() != dims.n_classes
        || cache.h1.rows() != n
        || cache.h1.cols() != dims.hidden_dim
        || cache.pre1.rows() != n
        || cache.pre1.cols() != dims.hidden_dim
        || x_t.rows() != dims.in_dim
        || x_t.cols() != n
        || adj_t.n_rows() != n
        || labels.len() != n;
    if stale {
        return Err(Error::Contract {
            op: "backward",
            detail: "cache does not match the model and inputs it claims to come from".into(),
        });
    }
    if node_set.is_empty() {
        return Err(Error::Config("gradient over an empty node set".into()));
    }

    // Softmax cross-entropy gradient, restricted to the supervised rows.
    let inv = 1.0 / node_set.len() as f64;
    let mut d_logits = DenseMatrix::zeros(n, dims.n_classes);
    for &i in node_set {
        for c in 0..dims.n_classes {
            let p = cache.log_probs.get(i, c).exp();
            let y = if labels[i] == c { 1.0 } else { 0.0 };
            d_logits.set(i, c, (p - y) * inv);
        }
    }

    // Second layer: logits = A_hat * (h1 * w2m).
    let d_t2 = adj_t.spmm(&d_logits, None)?;
    let g_w2 = cache
        .h1
        .transpose()
        .matmul(&d_t2, None)?
        .apply_mask(&model.mask_w2)?;

    // Into the hidden representation, through the embedding mask and relu.
    let w2m = model.w2.apply_mask(&model.mask_w2)?;
    let d_h1 = d_t2.matmul(&w2m.transpose(), None)?;
    let d_r1 = d_h1.apply_mask(&model.mask_h1)?;
    let d_pre1 = relu_backward(&d_r1, &cache.pre1)?;

    // First layer: pre1 = A_hat * (x * w1m).
    let d_t1 = adj_t.spmm(&d_pre1, None)?;
    let g_w1 = x_t.matmul(&d_t1, None)?.apply_mask(&model.mask_w1)?;

    Ok(Gradients { w1: g_w1, w2: g_w2 })
}

/// One bias-corrected Adam step; masked weight entries are re-zeroed after
/// the update.
pub fn adam_step(model: &mut GcnModel, grads: &Gradients, hyper: &AdamHyper) -> Result<()> {
    let dims = model.dims();
    if grads.w1.rows() != dims.in_dim
        || grads.w1.cols() != dims.hidden_dim
        || grads.w2.rows() != dims.hidden_dim
        || grads.w2.cols() != dims.n_classes
    {
        return Err(Error::Shape {
            op: "adam_step",
            detail: "gradient shapes do not match the model".into(),
        });
    }
    model.adam.step += 1;
    let t = model.adam.step;
    update_matrix(&mut model.w1, &grads.w1, &mut model.adam.m_w1, &mut model.adam.v_w1, t, hyper);
    update_matrix(&mut model.w2, &grads.w2, &mut model.adam.m_w2, &mut model.adam.v_w2, t, hyper);
    model.enforce_masks();
    Ok(())
}

fn update_matrix(
    w: &mut DenseMatrix,
    g: &DenseMatrix,
    m: &mut DenseMatrix,
    v: &mut DenseMatrix,
    t: u64,
    hyper: &AdamHyper,
) {
    let bias1 = 1.0 - hyper.beta1.powi(t as i32);
    let bias2 = 1.0 - hyper.beta2.powi(t as i32);
    let (wv, gv, mv, vv) = (
        w.values_mut(),
        g.values(),
        m.values_mut(),
        v.values_mut(),
    );
    for i in 0..wv.len() {
        let grad = gv[i] + hyper.weight_decay * wv[i];
        mv[i] = hyper.beta1 * mv[i] + (1.0 - hyper.beta1) * grad;
        vv[i] = hyper.beta2 * vv[i] + (1.0 - hyper.beta2) * grad * grad;
        let m_hat = mv[i] / bias1;
        let v_hat = vv[i] / bias2;
        wv[i] -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
    }
}

/// Classification accuracy over `node_set` given log-probabilities; argmax
/// ties break to the lowest class index.
pub fn accuracy_from_log_probs(
    log_probs: &DenseMatrix,
    labels: &[usize],
    node_set: &[usize],
) -> Result<f64> {
    if node_set.is_empty() {
        return Err(Error::Config("accuracy over an empty node set".into()));
    }
    let mut correct = 0usize;
    for &i in node_set {
        let row = log_probs.row(i);
        let mut best = 0usize;
        for (c, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = c;
            }
        }
        if best == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / node_set.len() as f64)
}

/// Run a forward pass and score accuracy on `node_set`.
pub fn evaluate(
    model: &GcnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    labels: &[usize],
    node_set: &[usize],
) -> Result<f64> {
    let cache = forward(model, adj, x, None)?;
    accuracy_from_log_probs(&cache.log_probs, labels, node_set)
}
