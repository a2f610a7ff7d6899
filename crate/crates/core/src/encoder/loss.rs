//! Euclidean embedding distance and the contrastive pair loss
//! ½·y·D² + ½·(1-y)·max(m-D, 0)² with its analytic gradient.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::tensor::TensorError;

/// ‖e1 − e2‖₂.
pub fn euclidean_distance(e1: &[f64], e2: &[f64]) -> Result<f64, TensorError> {
    if e1.len() != e2.len() {
        return Err(TensorError::DimensionMismatch {
            context: "euclidean distance",
            expected: e1.len(),
            got: e2.len(),
        });
    }
    let mut sum = 0.0;
    for (a, b) in e1.iter().zip(e2) {
        let d = a - b;
        sum = math::fma(d, d, sum);
    }
    Ok(math::sqrt(sum))
}

fn check_pair_args(e1: &[f64], e2: &[f64], y: u8, margin: f64) -> Result<(), TensorError> {
    if y > 1 {
        return Err(TensorError::InvalidArgument {
            reason: "pair label must be 0 or 1",
        });
    }
    if !(margin > 0.0) {
        return Err(TensorError::InvalidArgument {
            reason: "margin must be positive",
        });
    }
    if e1.len() != e2.len() {
        return Err(TensorError::DimensionMismatch {
            context: "contrastive loss",
            expected: e1.len(),
            got: e2.len(),
        });
    }
    Ok(())
}

/// Contrastive loss of one embedding pair. `y = 1` marks a same-class pair.
pub fn contrastive_loss(e1: &[f64], e2: &[f64], y: u8, margin: f64) -> Result<f64, TensorError> {
    check_pair_args(e1, e2, y, margin)?;
    let d = euclidean_distance(e1, e2)?;
    Ok(if y == 1 {
        0.5 * d * d
    } else {
        let hinge = (margin - d).max(0.0);
        0.5 * hinge * hinge
    })
}

/// Gradient of [`contrastive_loss`] with respect to both embeddings.
///
/// Positive pairs: ∂L/∂e1 = e1 − e2. Negative pairs inside the margin:
/// ∂L/∂e1 = −(m−D)·(e1−e2)/D; zero at D = 0 (subgradient choice) and for
/// D ≥ m. Always ∂L/∂e2 = −∂L/∂e1.
pub fn contrastive_loss_grad(
    e1: &[f64],
    e2: &[f64],
    y: u8,
    margin: f64,
) -> Result<(Vec<f64>, Vec<f64>), TensorError> {
    check_pair_args(e1, e2, y, margin)?;
    let d = euclidean_distance(e1, e2)?;
    let n = e1.len();
    let mut g1 = vec![0.0; n];
    if y == 1 {
        for i in 0..n {
            g1[i] = e1[i] - e2[i];
        }
    } else if d > 0.0 && d < margin {
        let scale = -(margin - d) / d;
        for i in 0..n {
            g1[i] = scale * (e1[i] - e2[i]);
        }
    }
    let g2: Vec<f64> = g1.iter().map(|&g| -g).collect();
    Ok((g1, g2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basics() {
        let z = [0.0; 8];
        assert_eq!(euclidean_distance(&z, &z).unwrap(), 0.0);
        let mut a = [0.0; 8];
        a[0] = 3.0;
        a[1] = 4.0;
        assert_eq!(euclidean_distance(&a, &[0.0; 8]).unwrap(), 5.0);
        assert!(euclidean_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn distance_is_symmetric() {
        let mut rng = crate::rng::SeedStream::new(17);
        for _ in 0..50 {
            let a: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
            assert_eq!(
                euclidean_distance(&a, &b).unwrap().to_bits(),
                euclidean_distance(&b, &a).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn loss_analytic_table() {
        // y=1, D=0
        let z = [0.0; 4];
        assert_eq!(contrastive_loss(&z, &z, 1, 0.5).unwrap(), 0.0);
        // y=0, D >= m saturates
        let far = [10.0, 0.0, 0.0, 0.0];
        assert_eq!(contrastive_loss(&far, &z, 0, 0.5).unwrap(), 0.0);
        // y=0, m=0.5, D=0.3 -> 0.5 * 0.2^2 = 0.02
        let near = [0.3, 0.0, 0.0, 0.0];
        let l = contrastive_loss(&near, &z, 0, 0.5).unwrap();
        assert!((l - 0.02).abs() < 1e-12, "loss {l}");
        // y=1, D=1 -> 0.5
        let unit = [1.0, 0.0, 0.0, 0.0];
        let l = contrastive_loss(&unit, &z, 1, 0.5).unwrap();
        assert!((l - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_label_and_margin() {
        let z = [0.0; 2];
        assert!(contrastive_loss(&z, &z, 2, 0.5).is_err());
        assert!(contrastive_loss(&z, &z, 0, 0.0).is_err());
        assert!(contrastive_loss_grad(&z, &z, 3, 0.5).is_err());
    }

    #[test]
    fn grad_flat_region_and_positive_direction() {
        let z = [0.0; 4];
        let far = [10.0, 0.0, 0.0, 0.0];
        let (g1, g2) = contrastive_loss_grad(&far, &z, 0, 0.5).unwrap();
        assert!(g1.iter().all(|&g| g == 0.0));
        assert!(g2.iter().all(|&g| g == 0.0));

        let mut e1 = [0.0; 4];
        e1[0] = 1.0;
        let (g1, g2) = contrastive_loss_grad(&e1, &z, 1, 0.5).unwrap();
        assert_eq!(g1[0], 1.0);
        assert_eq!(&g1[1..], &[0.0, 0.0, 0.0]);
        assert_eq!(g2[0], -1.0);
    }

    #[test]
    fn grad_at_zero_distance_is_zero_subgradient() {
        let z = [0.5; 4];
        let (g1, _) = contrastive_loss_grad(&z, &z, 0, 0.5).unwrap();
        assert!(g1.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn grad_matches_finite_differences() {
        use crate::tensor::grad_check;
        let mut rng = crate::rng::SeedStream::new(23);
        let m = 0.75;
        for case in 0..40 {
            let y = (case % 2) as u8;
            let e1: Vec<f64> = (0..8).map(|_| rng.normal() * 0.3).collect();
            let e2: Vec<f64> = (0..8).map(|_| rng.normal() * 0.3).collect();
            let d = euclidean_distance(&e1, &e2).unwrap();
            // stay away from the kinks at D=0 and D=m
            if d < 0.05 || (d - m).abs() < 0.05 {
                continue;
            }
            let (g1, g2) = contrastive_loss_grad(&e1, &e2, y, m).unwrap();
            let f1 = |p: &[f64]| contrastive_loss(p, &e2, y, m).unwrap();
            let err1 = grad_check(f1, &g1, &e1, 1e-6).unwrap();
            assert!(err1 < 1e-6, "e1 grad err {err1} (case {case})");
            let f2 = |p: &[f64]| contrastive_loss(&e1, p, y, m).unwrap();
            let err2 = grad_check(f2, &g2, &e2, 1e-6).unwrap();
            assert!(err2 < 1e-6, "e2 grad err {err2} (case {case})");
        }
    }

    #[test]
    fn swapping_embeddings_preserves_loss_and_swaps_grads() {
        let mut rng = crate::rng::SeedStream::new(29);
        for y in [0u8, 1] {
            let e1: Vec<f64> = (0..8).map(|_| rng.normal() * 0.2).collect();
            let e2: Vec<f64> = (0..8).map(|_| rng.normal() * 0.2).collect();
            let l12 = contrastive_loss(&e1, &e2, y, 0.5).unwrap();
            let l21 = contrastive_loss(&e2, &e1, y, 0.5).unwrap();
            assert_eq!(l12.to_bits(), l21.to_bits());
            let (a1, a2) = contrastive_loss_grad(&e1, &e2, y, 0.5).unwrap();
            let (b1, b2) = contrastive_loss_grad(&e2, &e1, y, 0.5).unwrap();
            assert_eq!(a1, b2);
            assert_eq!(a2, b1);
        }
    }
}
