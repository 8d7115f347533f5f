//! Dense-tensor numeric core: explicit forward/backward passes, a seeded
//! RNG, optimizer steps, and a finite-difference gradient checker.
//!
//! Everything is 64-bit and deterministic: the same inputs and seed produce
//! bitwise-identical outputs on every platform.

mod gradcheck;
mod layers;
mod optim;
mod rng;
mod tensor;

pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport};
pub use layers::{
    conv1d_backward, conv1d_forward, dense_softmax_xent, embedding_backward, embedding_forward,
    maxpool_backward, maxpool_forward, Activation, SoftmaxXent,
};
pub use optim::{adam_step, sgd_step, AdamParams};
pub use rng::Rng;
pub use tensor::Tensor;

/// Half-width of the balanced uniform init for a layer with the given fan.
pub fn xavier_range(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Half-width of the uniform init used for embedding matrices.
pub const EMBED_INIT_RANGE: f64 = 0.05;
