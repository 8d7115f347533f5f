//! Central finite-difference verification of analytic gradients.

use crate::error::{Error, Result};
use crate::numerics::Rng;

#[derive(Debug, Clone)]
pub struct GradCheckOptions {
    /// Perturbation size for central differences.
    pub step: f64,
    /// Maximum accepted relative error.
    pub tolerance: f64,
    /// Coordinates above which a random subsample is checked instead of all.
    pub max_coords: usize,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-5,
            tolerance: 1e-6,
            max_coords: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_coord: usize,
    pub coords_checked: usize,
    pub passed: bool,
}

/// Compares `analytic` against central differences of `loss` around `params`.
///
/// For tensors larger than `max_coords`, a seeded random subsample of
/// coordinates is checked. Coordinates where both gradients are tiny are
/// compared absolutely; everywhere else the error is relative to the larger
/// magnitude.
pub fn grad_check<F>(
    loss: F,
    params: &[f64],
    analytic: &[f64],
    opts: &GradCheckOptions,
    rng: &mut Rng,
) -> Result<GradCheckReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if analytic.len() != params.len() {
        return Err(Error::Shape(format!(
            "analytic gradient has {} entries for {} parameters",
            analytic.len(),
            params.len()
        )));
    }
    let coords = rng.sample_indices(params.len(), opts.max_coords);
    let mut scratch = params.to_vec();
    let mut max_rel = 0.0f64;
    let mut worst = 0usize;
    for &i in &coords {
        let orig = scratch[i];
        scratch[i] = orig + opts.step;
        let up = loss(&scratch)?;
        scratch[i] = orig - opts.step;
        let down = loss(&scratch)?;
        scratch[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss while perturbing coordinate {i}"
            )));
        }
        let numeric = (up - down) / (2.0 * opts.step);
        let rel = relative_error(analytic[i], numeric);
        if rel > max_rel {
            max_rel = rel;
            worst = i;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        worst_coord: worst,
        coords_checked: coords.len(),
        passed: max_rel < opts.tolerance,
    })
}

/// Relative error, falling back to absolute error when both values are tiny.
fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-6 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient_matches() {
        // f(x) = sum x^2, grad = 2x; at x = 3 the slope is 6
        let params = vec![3.0];
        let analytic = vec![6.0];
        let mut rng = Rng::new(0);
        let report = grad_check(
            |p| Ok(p.iter().map(|x| x * x).sum()),
            &params,
            &analytic,
            &GradCheckOptions {
                tolerance: 1e-8,
                ..Default::default()
            },
            &mut rng,
        )
        .unwrap();
        assert!(report.passed, "max rel error {}", report.max_rel_error);
    }

    #[test]
    fn corrupted_gradient_fails() {
        let params = vec![3.0, -1.5];
        let analytic = vec![12.0, -6.0]; // deliberately scaled x2
        let mut rng = Rng::new(0);
        let report = grad_check(
            |p| Ok(p.iter().map(|x| x * x).sum()),
            &params,
            &analytic,
            &GradCheckOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert!(!report.passed);
        assert!(report.max_rel_error > 0.4);
    }

    #[test]
    fn non_finite_loss_is_a_numeric_error() {
        let params = vec![0.0];
        let analytic = vec![0.0];
        let mut rng = Rng::new(0);
        let err = grad_check(
            |_| Ok(f64::NAN),
            &params,
            &analytic,
            &GradCheckOptions::default(),
            &mut rng,
        );
        assert!(matches!(err, Err(Error::Numeric(_))));
    }

    #[test]
    fn large_tensors_are_subsampled() {
        let params = vec![1.0; 5000];
        let analytic = vec![2.0; 5000];
        let mut rng = Rng::new(1);
        let report = grad_check(
            |p| Ok(p.iter().map(|x| x * x).sum()),
            &params,
            &analytic,
            &GradCheckOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.coords_checked, 200);
        assert!(report.passed);
    }
}
