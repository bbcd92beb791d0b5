use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::math::{softmax_row, Matrix};

/// Per-head query / key / value projections plus the shared output
/// projection. Head matrices are `d_model × head_dim`; `w_o` is
/// `d_model × d_model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub w_q: Vec<Matrix>,
    pub w_k: Vec<Matrix>,
    pub w_v: Vec<Matrix>,
    pub w_o: Matrix,
}

impl AttentionParams {
    pub fn n_heads(&self) -> usize {
        self.w_q.len()
    }

    pub fn head_dim(&self) -> usize {
        self.w_q.first().map(Matrix::cols).unwrap_or(0)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            w_q: self.w_q.iter().map(Matrix::zeros_like).collect(),
            w_k: self.w_k.iter().map(Matrix::zeros_like).collect(),
            w_v: self.w_v.iter().map(Matrix::zeros_like).collect(),
            w_o: self.w_o.zeros_like(),
        }
    }
}

/// Which (query, key) pairs are forbidden.
#[derive(Debug, Clone, PartialEq)]
pub enum AttentionMask {
    /// Query i may only see keys j ≤ i.
    Causal,
    /// Keys flagged `true` are invisible to every query (padding rows).
    KeyPadding(Vec<bool>),
}

impl AttentionMask {
    fn blocks(&self, query: usize, key: usize) -> bool {
        match self {
            AttentionMask::Causal => key > query,
            AttentionMask::KeyPadding(flags) => flags.get(key).copied().unwrap_or(false),
        }
    }
}

/// Forward intermediates needed by the backward pass.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    pub q_heads: Vec<Matrix>,
    pub k_heads: Vec<Matrix>,
    pub v_heads: Vec<Matrix>,
    pub probs: Vec<Matrix>,
    pub concat: Matrix,
}

impl AttentionCache {
    /// Attention weight matrix of one head (rows sum to 1, or to 0 for
    /// fully masked queries).
    pub fn head_probs(&self, head: usize) -> &Matrix {
        &self.probs[head]
    }
}

fn check_inputs(
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    params: &AttentionParams,
) -> Result<(), ModelError> {
    let d = params.w_o.rows();
    for (what, m) in [("query width", q), ("key width", k), ("value width", v)] {
        if m.cols() != d {
            return Err(ModelError::Shape {
                what,
                expected: d,
                got: m.cols(),
            });
        }
    }
    if k.rows() != v.rows() {
        return Err(ModelError::Shape {
            what: "key/value row count",
            expected: k.rows(),
            got: v.rows(),
        });
    }
    Ok(())
}

/// Scaled dot-product attention over all heads, concatenated and projected
/// through `w_o`. Scores are divided by sqrt(head_dim); masked positions
/// get -inf before the softmax, and a fully masked query row comes out as
/// zeros.
pub fn mha_forward(
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    params: &AttentionParams,
    mask: Option<&AttentionMask>,
) -> Result<(Matrix, AttentionCache), ModelError> {
    check_inputs(q, k, v, params)?;
    let n_heads = params.n_heads();
    let scale = 1.0 / (params.head_dim() as f64).sqrt();

    let mut q_heads = Vec::with_capacity(n_heads);
    let mut k_heads = Vec::with_capacity(n_heads);
    let mut v_heads = Vec::with_capacity(n_heads);
    let mut probs = Vec::with_capacity(n_heads);
    let mut outputs = Vec::with_capacity(n_heads);

    for h in 0..n_heads {
        let qh = q.matmul(&params.w_q[h]);
        let kh = k.matmul(&params.w_k[h]);
        let vh = v.matmul(&params.w_v[h]);

        let mut scores = qh.matmul_bt(&kh).scale(scale);
        if let Some(mask) = mask {
            for row in 0..scores.rows() {
                for col in 0..scores.cols() {
                    if mask.blocks(row, col) {
                        scores.set(row, col, f64::NEG_INFINITY);
                    }
                }
            }
        }
        for row in 0..scores.rows() {
            softmax_row(scores.row_mut(row));
        }
        let out = scores.matmul(&vh);

        q_heads.push(qh);
        k_heads.push(kh);
        v_heads.push(vh);
        probs.push(scores);
        outputs.push(out);
    }

    let refs: Vec<&Matrix> = outputs.iter().collect();
    let concat = Matrix::hstack(&refs);
    let projected = concat.matmul(&params.w_o);
    Ok((
        projected,
        AttentionCache {
            q_heads,
            k_heads,
            v_heads,
            probs,
            concat,
        },
    ))
}

/// Attention without the cache, for inference-style callers.
pub fn multi_head_attention(
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    params: &AttentionParams,
    mask: Option<&AttentionMask>,
) -> Result<Matrix, ModelError> {
    Ok(mha_forward(q, k, v, params, mask)?.0)
}

/// Backward pass. Returns (dQ, dK, dV) and accumulates parameter
/// gradients into `grads`.
pub fn mha_backward(
    d_out: &Matrix,
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    params: &AttentionParams,
    cache: &AttentionCache,
    grads: &mut AttentionParams,
) -> (Matrix, Matrix, Matrix) {
    let n_heads = params.n_heads();
    let head_dim = params.head_dim();
    let scale = 1.0 / (head_dim as f64).sqrt();

    grads.w_o.add_assign(&cache.concat.matmul_at(d_out));
    let d_concat = d_out.matmul_bt(&params.w_o);

    let mut d_q = q.zeros_like();
    let mut d_k = k.zeros_like();
    let mut d_v = v.zeros_like();

    for h in 0..n_heads {
        let d_head_out = d_concat.col_slice(h * head_dim, (h + 1) * head_dim);
        let probs = &cache.probs[h];

        let d_probs = d_head_out.matmul_bt(&cache.v_heads[h]);
        let d_vh = probs.matmul_at(&d_head_out);

        // softmax backward: dS = P ⊙ (dP - rowsum(dP ⊙ P)); masked and
        // fully-masked entries have P = 0 and so contribute nothing.
        let mut d_scores = Matrix::zeros(probs.rows(), probs.cols());
        for row in 0..probs.rows() {
            let p_row = probs.row(row);
            let dp_row = d_probs.row(row);
            let dot: f64 = p_row.iter().zip(dp_row).map(|(p, dp)| p * dp).sum();
            let dst = d_scores.row_mut(row);
            for ((d, &p), &dp) in dst.iter_mut().zip(p_row).zip(dp_row) {
                *d = p * (dp - dot);
            }
        }

        let d_qh = d_scores.matmul(&cache.k_heads[h]).scale(scale);
        let d_kh = d_scores.matmul_at(&cache.q_heads[h]).scale(scale);

        grads.w_q[h].add_assign(&q.matmul_at(&d_qh));
        grads.w_k[h].add_assign(&k.matmul_at(&d_kh));
        grads.w_v[h].add_assign(&v.matmul_at(&d_vh));

        d_q.add_assign(&d_qh.matmul_bt(&params.w_q[h]));
        d_k.add_assign(&d_kh.matmul_bt(&params.w_k[h]));
        d_v.add_assign(&d_vh.matmul_bt(&params.w_v[h]));
    }

    (d_q, d_k, d_v)
}
