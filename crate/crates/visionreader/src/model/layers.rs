use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::Matrix;

const LN_EPS: f64 = 1e-9;

/// Affine layer normalization parameters: a gain and bias per channel,
/// stored as 1×d matrices so the optimizer and checkpoint treat every
/// parameter the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerNormParams {
    pub gain: Matrix,
    pub bias: Matrix,
}

impl LayerNormParams {
    pub fn identity(d: usize) -> Self {
        Self {
            gain: Matrix::from_fn(1, d, |_, _| 1.0),
            bias: Matrix::zeros(1, d),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            gain: self.gain.zeros_like(),
            bias: self.bias.zeros_like(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayerNormCache {
    pub normalized: Matrix,
    inv_std: Vec<f64>,
}

/// Row-wise normalization to zero mean and unit variance, then affine.
pub fn layer_norm_forward(x: &Matrix, params: &LayerNormParams) -> (Matrix, LayerNormCache) {
    let d = x.cols();
    let mut normalized = Matrix::zeros(x.rows(), d);
    let mut out = Matrix::zeros(x.rows(), d);
    let mut inv_std = Vec::with_capacity(x.rows());
    for r in 0..x.rows() {
        let row = x.row(r);
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let is = 1.0 / (var + LN_EPS).sqrt();
        inv_std.push(is);
        for (c, &x) in row.iter().enumerate() {
            let xhat = (x - mean) * is;
            normalized.set(r, c, xhat);
            out.set(r, c, params.gain.get(0, c) * xhat + params.bias.get(0, c));
        }
    }
    (
        out,
        LayerNormCache {
            normalized,
            inv_std,
        },
    )
}

pub fn layer_norm_backward(
    d_out: &Matrix,
    cache: &LayerNormCache,
    params: &LayerNormParams,
    grads: &mut LayerNormParams,
) -> Matrix {
    let d = d_out.cols();
    let mut d_x = Matrix::zeros(d_out.rows(), d);
    for r in 0..d_out.rows() {
        let dy = d_out.row(r);
        let xhat = cache.normalized.row(r);
        for c in 0..d {
            *grads.gain.at_mut(c) += dy[c] * xhat[c];
            *grads.bias.at_mut(c) += dy[c];
        }
        let dxhat: Vec<f64> = (0..d).map(|c| dy[c] * params.gain.get(0, c)).collect();
        let sum_dxhat: f64 = dxhat.iter().sum();
        let sum_dxhat_xhat: f64 = dxhat.iter().zip(xhat).map(|(a, b)| a * b).sum();
        let inv_std = cache.inv_std[r];
        let dst = d_x.row_mut(r);
        for c in 0..d {
            dst[c] =
                inv_std / d as f64 * (d as f64 * dxhat[c] - sum_dxhat - xhat[c] * sum_dxhat_xhat);
        }
    }
    d_x
}

/// Two-layer position-wise network with ReLU in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForwardParams {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

impl FeedForwardParams {
    pub fn zeros_like(&self) -> Self {
        Self {
            w1: self.w1.zeros_like(),
            b1: self.b1.zeros_like(),
            w2: self.w2.zeros_like(),
            b2: self.b2.zeros_like(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeedForwardCache {
    input: Matrix,
    hidden: Matrix,
}

pub fn feed_forward(x: &Matrix, params: &FeedForwardParams) -> (Matrix, FeedForwardCache) {
    let mut hidden = x.matmul(&params.w1);
    for r in 0..hidden.rows() {
        let row = hidden.row_mut(r);
        for (c, v) in row.iter_mut().enumerate() {
            *v = (*v + params.b1.get(0, c)).max(0.0);
        }
    }
    let mut out = hidden.matmul(&params.w2);
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        for (c, v) in row.iter_mut().enumerate() {
            *v += params.b2.get(0, c);
        }
    }
    (
        out,
        FeedForwardCache {
            input: x.clone(),
            hidden,
        },
    )
}

pub fn feed_forward_backward(
    d_out: &Matrix,
    cache: &FeedForwardCache,
    params: &FeedForwardParams,
    grads: &mut FeedForwardParams,
) -> Matrix {
    for r in 0..d_out.rows() {
        for c in 0..d_out.cols() {
            *grads.b2.at_mut(c) += d_out.get(r, c);
        }
    }
    grads.w2.add_assign(&cache.hidden.matmul_at(d_out));
    let mut d_hidden = d_out.matmul_bt(&params.w2);
    // ReLU gate: hidden holds post-activation values, zero exactly where
    // the unit was clamped.
    for r in 0..d_hidden.rows() {
        for c in 0..d_hidden.cols() {
            if cache.hidden.get(r, c) == 0.0 {
                d_hidden.set(r, c, 0.0);
            }
        }
    }
    for r in 0..d_hidden.rows() {
        for c in 0..d_hidden.cols() {
            *grads.b1.at_mut(c) += d_hidden.get(r, c);
        }
    }
    grads.w1.add_assign(&cache.input.matmul_at(&d_hidden));
    d_hidden.matmul_bt(&params.w1)
}

/// Inverted dropout. In eval mode (`rng: None`) this is the identity and
/// the cache is empty.
#[derive(Debug, Clone)]
pub struct DropoutMask(Option<Matrix>);

pub fn dropout_forward(
    x: &Matrix,
    rate: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> (Matrix, DropoutMask) {
    match rng {
        Some(rng) if rate > 0.0 => {
            use rand::RngExt;
            let keep = 1.0 - rate;
            let mask = Matrix::from_fn(x.rows(), x.cols(), |_, _| {
                if rng.random_range(0.0..1.0) < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            let mut out = x.clone();
            for i in 0..out.len() {
                *out.at_mut(i) *= mask.at(i);
            }
            (out, DropoutMask(Some(mask)))
        }
        _ => (x.clone(), DropoutMask(None)),
    }
}

pub fn dropout_backward(d_out: &Matrix, mask: &DropoutMask) -> Matrix {
    match &mask.0 {
        Some(mask) => {
            let mut d = d_out.clone();
            for i in 0..d.len() {
                *d.at_mut(i) *= mask.at(i);
            }
            d
        }
        None => d_out.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-2.0..2.0))
    }

    #[test]
    fn layer_norm_rows_have_zero_mean_unit_variance() {
        let x = random_matrix(5, 16, 3);
        let params = LayerNormParams::identity(16);
        let (out, cache) = layer_norm_forward(&x, &params);
        for r in 0..out.rows() {
            let row = cache.normalized.row(r);
            let mean: f64 = row.iter().sum::<f64>() / 16.0;
            let var: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 16.0;
            assert!(mean.abs() < 1e-9, "mean {mean}");
            assert!((var - 1.0).abs() < 1e-6, "var {var}");
        }
    }

    #[test]
    fn feed_forward_zero_input_gives_bias() {
        let params = FeedForwardParams {
            w1: random_matrix(4, 8, 1),
            b1: Matrix::zeros(1, 8),
            w2: random_matrix(8, 4, 2),
            b2: Matrix::from_fn(1, 4, |_, c| c as f64),
        };
        let (out, _) = feed_forward(&Matrix::zeros(2, 4), &params);
        for r in 0..2 {
            for c in 0..4 {
                assert_eq!(out.get(r, c), c as f64);
            }
        }
    }

    #[test]
    fn dropout_eval_mode_is_identity() {
        let x = random_matrix(3, 4, 9);
        let (out, mask) = dropout_forward(&x, 0.5, None);
        assert_eq!(out, x);
        assert_eq!(dropout_backward(&x, &mask), x);
    }

    #[test]
    fn dropout_training_mode_scales_survivors() {
        let x = Matrix::from_fn(20, 20, |_, _| 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (out, _) = dropout_forward(&x, 0.25, Some(&mut rng));
        let survivors = out.data().iter().filter(|&&v| v != 0.0).count();
        assert!(survivors > 200 && survivors < 400);
        for &v in out.data() {
            assert!(v == 0.0 || (v - 1.0 / 0.75).abs() < 1e-12);
        }
    }
}
