//! The classifier: embedding, three parallel convolution+pool channels, and
//! a dense softmax head.
//!
//! Each channel convolves the embedded sequence with its own kernel size
//! `r`, applies stride-`r` max pooling, and contributes `M * (L / r)` pooled
//! features. The channels' pooled maps are flattened in kernel-size order
//! into one vector for the dense layer.

use crate::error::{Error, Result};
use crate::numerics::{
    adam_step, conv1d_backward, conv1d_forward, dense_softmax_xent, embedding_backward,
    embedding_forward, maxpool_backward, maxpool_forward, sgd_step, xavier_range, Activation,
    AdamParams, Rng, Tensor, EMBED_INIT_RANGE,
};
use crate::vocab::EncodedSequence;

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub kernel_sizes: Vec<usize>,
    pub filters_per_channel: usize,
    pub seq_len: usize,
    pub class_count: usize,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab_size: 2_000,
            embed_dim: 64,
            kernel_sizes: vec![3, 4, 5],
            filters_per_channel: 128,
            seq_len: 60,
            class_count: 20,
            activation: Activation::Relu,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::Config(
                "vocabulary must hold at least PAD and UNK".into(),
            ));
        }
        if self.embed_dim == 0 || self.filters_per_channel == 0 || self.seq_len == 0 {
            return Err(Error::Config("all model sizes must be positive".into()));
        }
        if self.class_count < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        if self.kernel_sizes.is_empty() {
            return Err(Error::Config("need at least one convolution channel".into()));
        }
        for &r in &self.kernel_sizes {
            if r == 0 {
                return Err(Error::Config("kernel size must be positive".into()));
            }
            if self.seq_len % r != 0 {
                return Err(Error::Config(format!(
                    "sequence length {} is not divisible by kernel/pooling size {r}",
                    self.seq_len
                )));
            }
        }
        Ok(())
    }

    /// Pooled feature count feeding the dense layer.
    pub fn feature_dim(&self) -> usize {
        self.kernel_sizes
            .iter()
            .map(|r| self.filters_per_channel * (self.seq_len / r))
            .sum()
    }
}

/// Exact trainable-parameter count for a configuration.
pub fn param_count(config: &ModelConfig) -> usize {
    let embed = config.embed_dim * config.vocab_size;
    let conv: usize = config
        .kernel_sizes
        .iter()
        .map(|r| config.filters_per_channel * r * config.embed_dim + config.filters_per_channel)
        .sum();
    let dense = config.class_count * config.feature_dim() + config.class_count;
    embed + conv + dense
}

/// One convolution channel's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub kernels: Tensor,
    pub bias: Tensor,
}

/// All trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub embedding: Tensor,
    pub channels: Vec<Channel>,
    pub dense_weights: Tensor,
    pub dense_bias: Tensor,
}

/// Gradients for every parameter tensor, in the same layout.
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub embedding: Tensor,
    pub channels: Vec<Channel>,
    pub dense_weights: Tensor,
    pub dense_bias: Tensor,
}

/// Draws parameters from the seeded init scheme: balanced uniform for
/// kernels and the dense layer, uniform [-0.05, 0.05] for the embedding.
pub fn init_model(config: &ModelConfig) -> Result<ModelParams> {
    config.validate()?;
    let mut rng = Rng::new(config.seed);
    let d = config.embed_dim;
    let v = config.vocab_size;
    let m = config.filters_per_channel;

    let mut embedding = Tensor::zeros(&[d, v]);
    rng.fill_uniform(embedding.values_mut(), -EMBED_INIT_RANGE, EMBED_INIT_RANGE);

    let mut channels = Vec::with_capacity(config.kernel_sizes.len());
    for &r in &config.kernel_sizes {
        let mut kernels = Tensor::zeros(&[m, r, d]);
        let a = xavier_range(r * d, m);
        rng.fill_uniform(kernels.values_mut(), -a, a);
        channels.push(Channel {
            kernels,
            bias: Tensor::zeros(&[m]),
        });
    }

    let f_dim = config.feature_dim();
    let k = config.class_count;
    let mut dense_weights = Tensor::zeros(&[k, f_dim]);
    let a = xavier_range(f_dim, k);
    rng.fill_uniform(dense_weights.values_mut(), -a, a);

    Ok(ModelParams {
        config: config.clone(),
        embedding,
        channels,
        dense_weights,
        dense_bias: Tensor::zeros(&[k]),
    })
}

impl ModelParams {
    /// Parameter tensors in the canonical order used by flattening,
    /// optimizer moments, and checkpoints.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.embedding];
        for ch in &self.channels {
            out.push(&ch.kernels);
            out.push(&ch.bias);
        }
        out.push(&self.dense_weights);
        out.push(&self.dense_bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding];
        for ch in &mut self.channels {
            out.push(&mut ch.kernels);
            out.push(&mut ch.bias);
        }
        out.push(&mut self.dense_weights);
        out.push(&mut self.dense_bias);
        out
    }

    /// All parameters as one flat vector, in canonical tensor order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for t in self.tensors() {
            out.extend_from_slice(t.values());
        }
        out
    }

    /// Rebuilds parameters from a flat vector produced by [`Self::to_flat`].
    pub fn from_flat(config: &ModelConfig, flat: &[f64]) -> Result<ModelParams> {
        let mut params = init_model(config)?;
        let mut offset = 0;
        for t in params.tensors_mut() {
            let len = t.len();
            if offset + len > flat.len() {
                return Err(Error::Shape("flat parameter vector too short".into()));
            }
            t.values_mut().copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        if offset != flat.len() {
            return Err(Error::Shape(format!(
                "flat parameter vector has {} extra values",
                flat.len() - offset
            )));
        }
        Ok(params)
    }
}

impl ModelGrads {
    pub fn zeros(config: &ModelConfig) -> ModelGrads {
        let d = config.embed_dim;
        let m = config.filters_per_channel;
        ModelGrads {
            embedding: Tensor::zeros(&[d, config.vocab_size]),
            channels: config
                .kernel_sizes
                .iter()
                .map(|&r| Channel {
                    kernels: Tensor::zeros(&[m, r, d]),
                    bias: Tensor::zeros(&[m]),
                })
                .collect(),
            dense_weights: Tensor::zeros(&[config.class_count, config.feature_dim()]),
            dense_bias: Tensor::zeros(&[config.class_count]),
        }
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.embedding];
        for ch in &self.channels {
            out.push(&ch.kernels);
            out.push(&ch.bias);
        }
        out.push(&self.dense_weights);
        out.push(&self.dense_bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding];
        for ch in &mut self.channels {
            out.push(&mut ch.kernels);
            out.push(&mut ch.bias);
        }
        out.push(&mut self.dense_weights);
        out.push(&mut self.dense_bias);
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for t in self.tensors() {
            out.extend_from_slice(t.values());
        }
        out
    }

    /// Accumulates `other` into `self` elementwise.
    pub fn add_assign(&mut self, other: &ModelGrads) {
        for (mine, theirs) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (a, b) in mine.values_mut().iter_mut().zip(theirs.values()) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.values_mut() {
                *v *= factor;
            }
        }
    }
}

struct ChannelTrace {
    conv_out: Tensor,
    argmax: Vec<usize>,
    pooled_len: usize,
}

struct ForwardTrace {
    embedded: Tensor,
    channels: Vec<ChannelTrace>,
    features: Tensor,
}

fn forward_trace(params: &ModelParams, ids: &[usize]) -> Result<ForwardTrace> {
    let cfg = &params.config;
    if ids.len() != cfg.seq_len {
        return Err(Error::Shape(format!(
            "input has {} positions, model expects {}",
            ids.len(),
            cfg.seq_len
        )));
    }
    let embedded = embedding_forward(&params.embedding, ids)?;
    let mut channels = Vec::with_capacity(params.channels.len());
    let mut features = Vec::with_capacity(cfg.feature_dim());
    for (ch, &r) in params.channels.iter().zip(&cfg.kernel_sizes) {
        let conv_out = conv1d_forward(&embedded, &ch.kernels, &ch.bias, cfg.activation)?;
        let (pooled, argmax) = maxpool_forward(&conv_out, r)?;
        features.extend_from_slice(pooled.values());
        channels.push(ChannelTrace {
            conv_out,
            argmax,
            pooled_len: cfg.seq_len / r,
        });
    }
    let features = Tensor::from_values(&[features.len()], features)?;
    Ok(ForwardTrace {
        embedded,
        channels,
        features,
    })
}

/// Class distribution for one encoded input.
pub fn forward(params: &ModelParams, input: &EncodedSequence) -> Result<Tensor> {
    let trace = forward_trace(params, &input.ids)?;
    // gold label 0 is arbitrary; only the probabilities are kept
    let out = dense_softmax_xent(&trace.features, &params.dense_weights, &params.dense_bias, 0)?;
    Ok(out.probs)
}

/// Argmax of [`forward`]; ties go to the smallest class id.
pub fn predict(params: &ModelParams, input: &EncodedSequence) -> Result<usize> {
    let probs = forward(params, input)?;
    Ok(argmax(probs.values()))
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Cross-entropy loss and exact parameter gradients for one example.
pub fn loss_and_grads(
    params: &ModelParams,
    input: &EncodedSequence,
    gold: usize,
) -> Result<(f64, ModelGrads)> {
    let cfg = &params.config;
    let trace = forward_trace(params, &input.ids)?;
    let head = dense_softmax_xent(&trace.features, &params.dense_weights, &params.dense_bias, gold)?;

    let mut grads = ModelGrads::zeros(cfg);
    grads.dense_weights = head.grad_weights;
    grads.dense_bias = head.grad_bias;

    // split the flat feature gradient back into per-channel pooled maps and
    // push each through its pooling and convolution
    let m = cfg.filters_per_channel;
    let mut grad_embedded = Tensor::zeros(&[cfg.seq_len, cfg.embed_dim]);
    let mut offset = 0;
    for (c, (ch, tr)) in params.channels.iter().zip(&trace.channels).enumerate() {
        let len = m * tr.pooled_len;
        let grad_pooled = Tensor::from_values(
            &[tr.pooled_len, m],
            head.grad_features.values()[offset..offset + len].to_vec(),
        )?;
        offset += len;
        let grad_conv = maxpool_backward(&grad_pooled, &tr.argmax, cfg.seq_len)?;
        let (grad_in, grad_k, grad_b) = conv1d_backward(
            &trace.embedded,
            &ch.kernels,
            cfg.activation,
            &tr.conv_out,
            &grad_conv,
        )?;
        for (a, b) in grad_embedded
            .values_mut()
            .iter_mut()
            .zip(grad_in.values())
        {
            *a += b;
        }
        grads.channels[c] = Channel {
            kernels: grad_k,
            bias: grad_b,
        };
    }
    grads.embedding = embedding_backward(&grad_embedded, &input.ids, cfg.vocab_size)?;
    Ok((head.loss, grads))
}

/// Optimizer selection for a training run.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerKind {
    Adam(AdamParams),
    Sgd { lr: f64 },
}

impl OptimizerKind {
    pub fn learning_rate(&self) -> f64 {
        match self {
            OptimizerKind::Adam(hp) => hp.lr,
            OptimizerKind::Sgd { lr } => *lr,
        }
    }
}

/// First/second moment buffers plus the shared step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: usize,
}

impl OptimizerState {
    pub fn zeros(params: &ModelParams) -> OptimizerState {
        let sizes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
        OptimizerState {
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }
}

/// Applies one optimizer step with the gradients in `grads`, optionally with
/// L2 weight decay folded into the gradient.
pub fn apply_update(
    params: &mut ModelParams,
    grads: &ModelGrads,
    optimizer: &OptimizerKind,
    state: &mut OptimizerState,
    weight_decay: f64,
) -> Result<()> {
    state.step += 1;
    let tensors = params.tensors_mut();
    for (i, (t, g)) in tensors.into_iter().zip(grads.tensors()).enumerate() {
        let mut grad = g.values().to_vec();
        if weight_decay > 0.0 {
            for (gv, pv) in grad.iter_mut().zip(t.values()) {
                *gv += weight_decay * pv;
            }
        }
        match optimizer {
            OptimizerKind::Adam(hp) => adam_step(
                t.values_mut(),
                &grad,
                &mut state.m[i],
                &mut state.v[i],
                state.step,
                hp,
            )?,
            OptimizerKind::Sgd { lr } => sgd_step(t.values_mut(), &grad, *lr)?,
        }
    }
    Ok(())
}
