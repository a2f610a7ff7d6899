//! Central finite-difference gradient verification.

use alloc::vec::Vec;

use super::TensorError;

/// Compares an analytic gradient against central finite differences of `f`
/// at `point`, returning the maximum relative error
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-12)`.
///
/// `f` must be evaluable in a neighborhood of `point`; `step` is the
/// one-sided perturbation.
pub fn grad_check<F>(
    mut f: F,
    analytic: &[f64],
    point: &[f64],
    step: f64,
) -> Result<f64, TensorError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(step > 0.0) {
        return Err(TensorError::InvalidArgument {
            reason: "finite-difference step must be positive",
        });
    }
    if analytic.len() != point.len() {
        return Err(TensorError::DimensionMismatch {
            context: "grad_check",
            expected: point.len(),
            got: analytic.len(),
        });
    }

    let mut probe: Vec<f64> = point.to_vec();
    let mut worst = 0.0f64;
    for i in 0..point.len() {
        probe[i] = point[i] + step;
        let up = f(&probe);
        probe[i] = point[i] - step;
        let down = f(&probe);
        probe[i] = point[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(TensorError::NonFinite {
                context: "finite-difference evaluation",
            });
        }
        let numeric = (up - down) / (2.0 * step);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-12);
        let rel = (analytic[i] - numeric).abs() / denom;
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_is_exact() {
        // f(x) = 3x: analytic gradient 3, central differences are exact for
        // linear functions up to rounding
        let err = grad_check(|x| 3.0 * x[0], &[3.0], &[1.7], 1e-5).unwrap();
        assert!(err < 1e-10, "relative error {err}");
    }

    #[test]
    fn quadratic_function_checks_out() {
        let f = |x: &[f64]| x[0] * x[0] + 2.0 * x[0] * x[1] + x[1] * x[1] * x[1];
        let point = [0.7, -1.2];
        let analytic = [
            2.0 * point[0] + 2.0 * point[1],
            2.0 * point[0] + 3.0 * point[1] * point[1],
        ];
        let err = grad_check(f, &analytic, &point, 1e-5).unwrap();
        assert!(err < 1e-8, "relative error {err}");
    }

    #[test]
    fn zero_step_rejected() {
        assert!(matches!(
            grad_check(|x| x[0], &[1.0], &[0.0], 0.0),
            Err(TensorError::InvalidArgument { .. })
        ));
    }

    #[test]
    fn detects_wrong_gradient() {
        let err = grad_check(|x| x[0] * x[0], &[100.0], &[1.0], 1e-5).unwrap();
        assert!(err > 0.9);
    }
}
