//! Optimizer steps applied elementwise to flat parameter buffers.

use crate::error::{Error, Result};

/// Hyperparameters of the adaptive-moment optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected adaptive-moment update.
///
/// `t` is the 1-based step counter shared by all parameter tensors of a
/// model; `m` and `v` are the first and second moment buffers.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: usize,
    hp: &AdamParams,
) -> Result<()> {
    if grads.len() != params.len() || m.len() != params.len() || v.len() != params.len() {
        return Err(Error::Shape(format!(
            "adam buffers disagree: params {}, grads {}, m {}, v {}",
            params.len(),
            grads.len(),
            m.len(),
            v.len()
        )));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("adam step counter must be >= 1".into()));
    }
    let bc1 = 1.0 - hp.beta1.powi(t as i32);
    let bc2 = 1.0 - hp.beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= hp.lr * m_hat / (v_hat.sqrt() + hp.eps);
    }
    Ok(())
}

/// Plain gradient-descent update.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::Shape(format!(
            "sgd buffers disagree: params {}, grads {}",
            params.len(),
            grads.len()
        )));
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged_and_decays_moments() {
        let hp = AdamParams::default();
        let mut p = vec![0.5, -0.25];
        let mut m = vec![0.0; 2];
        let mut v = vec![0.0; 2];
        adam_step(&mut p, &[0.0, 0.0], &mut m, &mut v, 1, &hp).unwrap();
        assert_eq!(p, vec![0.5, -0.25]);
        assert_eq!(m, vec![0.0, 0.0]);

        // non-zero moments decay toward zero under zero gradients
        let mut m = vec![1.0];
        let mut v = vec![1.0];
        let mut p = vec![0.0];
        adam_step(&mut p, &[0.0], &mut m, &mut v, 5, &hp).unwrap();
        assert!(m[0] < 1.0 && m[0] > 0.0);
        assert!(v[0] < 1.0 && v[0] > 0.0);
    }

    #[test]
    fn first_step_moves_by_roughly_lr() {
        // scalar param 0, grad 1: bias correction makes m_hat = 1, v_hat = 1,
        // so the update is -lr / (1 + eps) which is approximately -lr
        let hp = AdamParams::default();
        let mut p = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0];
        adam_step(&mut p, &[1.0], &mut m, &mut v, 1, &hp).unwrap();
        let expected = -hp.lr / (1.0 + hp.eps);
        assert!((p[0] - expected).abs() < 1e-15, "got {}", p[0]);
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let hp = AdamParams::default();
        let run = || {
            let mut p = vec![0.3, -0.7, 1.1];
            let mut m = vec![0.0; 3];
            let mut v = vec![0.0; 3];
            for t in 1..=10 {
                let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
                adam_step(&mut p, &g, &mut m, &mut v, t, &hp).unwrap();
            }
            p
        };
        let a = run();
        let b = run();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = vec![0.0];
        let mut m = vec![0.0];
        let mut v = vec![0.0; 2];
        let err = adam_step(&mut p, &[1.0], &mut m, &mut v, 1, &AdamParams::default());
        assert!(err.is_err());
    }
}
