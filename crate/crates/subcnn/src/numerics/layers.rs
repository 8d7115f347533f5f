//! Forward and backward passes for every layer the classifier needs.
//!
//! All passes are written as explicit loops over row-major buffers. Each
//! backward computes the exact gradient of its forward definition; the
//! gradient-check harness in this module's sibling verifies them against
//! central finite differences.

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Elementwise activation applied after the convolution sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "relu" => Ok(Activation::Relu),
            "identity" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!(
                "unknown activation `{other}` (expected relu, identity, or tanh)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
        }
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output. Valid for all
    /// three supported activations; ReLU reports 0 at the kink.
    #[inline]
    pub fn derivative_from_output(&self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

/// Embedding lookup: row `l` of the output is column `ids[l]` of `w`.
///
/// `w` has shape `[d, vocab]`; the output has shape `[ids.len(), d]`.
/// Equivalent to multiplying `w` with the one-hot column vector of each id.
pub fn embedding_forward(w: &Tensor, ids: &[usize]) -> Result<Tensor> {
    let (d, vocab) = dims2(w, "embedding matrix")?;
    let mut out = Tensor::zeros(&[ids.len(), d]);
    let wv = w.values();
    let ov = out.values_mut();
    for (l, &id) in ids.iter().enumerate() {
        if id >= vocab {
            return Err(Error::Range(format!(
                "token id {id} out of range for vocabulary size {vocab}"
            )));
        }
        for c in 0..d {
            ov[l * d + c] = wv[c * vocab + id];
        }
    }
    Ok(out)
}

/// Gradient of [`embedding_forward`] with respect to `w`. Column `j`
/// accumulates the upstream rows at every position where `ids[l] == j`.
pub fn embedding_backward(grad_out: &Tensor, ids: &[usize], vocab: usize) -> Result<Tensor> {
    let (rows, d) = dims2(grad_out, "embedding upstream gradient")?;
    if rows != ids.len() {
        return Err(Error::Shape(format!(
            "upstream gradient has {rows} rows but there are {} ids",
            ids.len()
        )));
    }
    let mut grad_w = Tensor::zeros(&[d, vocab]);
    let gw = grad_w.values_mut();
    let go = grad_out.values();
    for (l, &id) in ids.iter().enumerate() {
        if id >= vocab {
            return Err(Error::Range(format!(
                "token id {id} out of range for vocabulary size {vocab}"
            )));
        }
        for c in 0..d {
            gw[c * vocab + id] += go[l * d + c];
        }
    }
    Ok(grad_w)
}

/// "Same" 1-d convolution over a `[L, d]` sequence.
///
/// The input is zero-padded with `(r-1)/2` rows on the left and the remainder
/// on the right, so the output keeps length `L`:
///
/// `out[l][m] = act(bias[m] + sum_{j,c} kernels[m][j][c] * padded[l+j][c])`
pub fn conv1d_forward(
    input: &Tensor,
    kernels: &Tensor,
    bias: &Tensor,
    activation: Activation,
) -> Result<Tensor> {
    let (seq_len, d) = dims2(input, "convolution input")?;
    let (m_count, r, kd) = dims3(kernels, "convolution kernels")?;
    if kd != d {
        return Err(Error::Shape(format!(
            "kernel depth {kd} does not match input depth {d}"
        )));
    }
    if bias.shape() != [m_count] {
        return Err(Error::Shape(format!(
            "bias shape {:?} does not match kernel count {m_count}",
            bias.shape()
        )));
    }
    let pad_left = (r - 1) / 2;
    let iv = input.values();
    let kv = kernels.values();
    let bv = bias.values();
    let mut out = Tensor::zeros(&[seq_len, m_count]);
    let ov = out.values_mut();
    for l in 0..seq_len {
        for m in 0..m_count {
            let mut acc = bv[m];
            for j in 0..r {
                // padded[l + j] corresponds to input row l + j - pad_left
                let row = (l + j).wrapping_sub(pad_left);
                if row < seq_len {
                    let irow = &iv[row * d..(row + 1) * d];
                    let krow = &kv[(m * r + j) * d..(m * r + j + 1) * d];
                    for c in 0..d {
                        acc += krow[c] * irow[c];
                    }
                }
            }
            ov[l * m_count + m] = activation.apply(acc);
        }
    }
    Ok(out)
}

/// Gradients of [`conv1d_forward`] for the input, kernels, and bias.
///
/// `output` must be the activation output of the matching forward call; the
/// activation derivative is reconstructed from it. Zero padding contributes
/// no input gradient.
pub fn conv1d_backward(
    input: &Tensor,
    kernels: &Tensor,
    activation: Activation,
    output: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (seq_len, d) = dims2(input, "convolution input")?;
    let (m_count, r, _) = dims3(kernels, "convolution kernels")?;
    if output.shape() != [seq_len, m_count] || grad_out.shape() != [seq_len, m_count] {
        return Err(Error::Shape(format!(
            "convolution backward expects [{seq_len}, {m_count}] output and gradient, got {:?} and {:?}",
            output.shape(),
            grad_out.shape()
        )));
    }
    let pad_left = (r - 1) / 2;
    let iv = input.values();
    let kv = kernels.values();

    // dz = grad_out * act'(pre-activation), reconstructed from the output
    let mut dz = vec![0.0; seq_len * m_count];
    for (i, v) in dz.iter_mut().enumerate() {
        *v = grad_out.values()[i] * activation.derivative_from_output(output.values()[i]);
    }

    let mut grad_input = Tensor::zeros(&[seq_len, d]);
    let mut grad_kernels = Tensor::zeros(&[m_count, r, d]);
    let mut grad_bias = Tensor::zeros(&[m_count]);
    let gi = grad_input.values_mut();
    let gk = grad_kernels.values_mut();
    let gb = grad_bias.values_mut();

    for l in 0..seq_len {
        for m in 0..m_count {
            let g = dz[l * m_count + m];
            if g == 0.0 {
                continue;
            }
            gb[m] += g;
            for j in 0..r {
                let row = (l + j).wrapping_sub(pad_left);
                if row < seq_len {
                    for c in 0..d {
                        gk[(m * r + j) * d + c] += g * iv[row * d + c];
                        gi[row * d + c] += g * kv[(m * r + j) * d + c];
                    }
                }
            }
        }
    }
    Ok((grad_input, grad_kernels, grad_bias))
}

/// Windowed max pooling with stride equal to the window size.
///
/// Returns the pooled `[L/r, M]` tensor and the winning row index per
/// `(window, column)` cell; ties go to the smallest row.
pub fn maxpool_forward(input: &Tensor, window: usize) -> Result<(Tensor, Vec<usize>)> {
    let (seq_len, m_count) = dims2(input, "pooling input")?;
    if window == 0 || seq_len % window != 0 {
        return Err(Error::Shape(format!(
            "sequence length {seq_len} is not divisible by pooling window {window}"
        )));
    }
    let pooled_len = seq_len / window;
    let iv = input.values();
    let mut out = Tensor::zeros(&[pooled_len, m_count]);
    let mut argmax = vec![0usize; pooled_len * m_count];
    let ov = out.values_mut();
    for q in 0..pooled_len {
        for m in 0..m_count {
            let mut best = f64::NEG_INFINITY;
            let mut best_l = q * window;
            for l in q * window..(q + 1) * window {
                let v = iv[l * m_count + m];
                if v > best {
                    best = v;
                    best_l = l;
                }
            }
            ov[q * m_count + m] = best;
            argmax[q * m_count + m] = best_l;
        }
    }
    Ok((out, argmax))
}

/// Routes each upstream gradient entry to its recorded argmax position.
pub fn maxpool_backward(grad_out: &Tensor, argmax: &[usize], seq_len: usize) -> Result<Tensor> {
    let (pooled_len, m_count) = dims2(grad_out, "pooling upstream gradient")?;
    if argmax.len() != pooled_len * m_count {
        return Err(Error::Shape(format!(
            "argmax buffer has {} entries, expected {}",
            argmax.len(),
            pooled_len * m_count
        )));
    }
    let mut grad_input = Tensor::zeros(&[seq_len, m_count]);
    let gi = grad_input.values_mut();
    let go = grad_out.values();
    for q in 0..pooled_len {
        for m in 0..m_count {
            let l = argmax[q * m_count + m];
            gi[l * m_count + m] += go[q * m_count + m];
        }
    }
    Ok(grad_input)
}

/// Loss, probabilities, and exact gradients of the softmax classifier.
pub struct SoftmaxXent {
    pub loss: f64,
    pub probs: Tensor,
    pub grad_features: Tensor,
    pub grad_weights: Tensor,
    pub grad_bias: Tensor,
}

/// Fully connected layer + softmax + cross-entropy against `gold`.
///
/// `features` is a flat `[F]` vector, `weights` is `[K, F]`, `bias` is `[K]`.
/// The softmax subtracts the max logit before exponentiating, so logits of
/// magnitude 1e3 survive without overflow.
pub fn dense_softmax_xent(
    features: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    gold: usize,
) -> Result<SoftmaxXent> {
    let (k_count, f_dim) = dims2(weights, "dense weights")?;
    if features.len() != f_dim {
        return Err(Error::Shape(format!(
            "feature vector has {} entries but dense layer expects {f_dim}",
            features.len()
        )));
    }
    if bias.shape() != [k_count] {
        return Err(Error::Shape(format!(
            "dense bias shape {:?} does not match class count {k_count}",
            bias.shape()
        )));
    }
    if gold >= k_count {
        return Err(Error::Range(format!(
            "gold label {gold} out of range for {k_count} classes"
        )));
    }
    let xv = features.values();
    let wv = weights.values();
    let bv = bias.values();

    let mut logits = vec![0.0; k_count];
    for k in 0..k_count {
        let row = &wv[k * f_dim..(k + 1) * f_dim];
        let mut acc = bv[k];
        for (w, x) in row.iter().zip(xv) {
            acc += w * x;
        }
        logits[k] = acc;
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric("non-finite logits in softmax".into()));
    }

    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    let loss = sum.ln() + max - logits[gold];

    // d loss / d logits = probs - onehot(gold)
    let mut dlogits = probs.clone();
    dlogits[gold] -= 1.0;

    let mut grad_features = Tensor::zeros(&[f_dim]);
    let mut grad_weights = Tensor::zeros(&[k_count, f_dim]);
    let gf = grad_features.values_mut();
    let gw = grad_weights.values_mut();
    for k in 0..k_count {
        let g = dlogits[k];
        let row = &wv[k * f_dim..(k + 1) * f_dim];
        for f in 0..f_dim {
            gf[f] += g * row[f];
            gw[k * f_dim + f] = g * xv[f];
        }
    }
    let grad_bias = Tensor::from_values(&[k_count], dlogits)?;

    Ok(SoftmaxXent {
        loss,
        probs: Tensor::from_values(&[k_count], probs)?,
        grad_features,
        grad_weights,
        grad_bias,
    })
}

fn dims2(t: &Tensor, what: &str) -> Result<(usize, usize)> {
    match t.shape() {
        [a, b] => Ok((*a, *b)),
        s => Err(Error::Shape(format!("{what} must be 2-d, got {s:?}"))),
    }
}

fn dims3(t: &Tensor, what: &str) -> Result<(usize, usize, usize)> {
    match t.shape() {
        [a, b, c] => Ok((*a, *b, *c)),
        s => Err(Error::Shape(format!("{what} must be 3-d, got {s:?}"))),
    }
}
