//! Random pair sampling for Siamese training.

use alloc::vec::Vec;

use crate::rng::SeedStream;
use crate::tensor::TensorError;

/// One sampled training pair: trial indices and the similarity label
/// (1 when both trials carry the same class).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pair {
    pub a: usize,
    pub b: usize,
    pub y: u8,
}

/// A batch of sampled pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBatch {
    pub pairs: Vec<Pair>,
}

impl PairBatch {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Draws `batch_size` uniformly random index pairs (a ≠ b) from
/// `labels.len()` trials, class-blind; `y` is set by label equality.
/// Fully determined by the rng state.
pub fn sample_pairs(
    labels: &[u8],
    batch_size: usize,
    rng: &mut SeedStream,
) -> Result<PairBatch, TensorError> {
    let n = labels.len();
    if n < 2 {
        return Err(TensorError::InvalidArgument {
            reason: "pair sampling needs at least two trials",
        });
    }
    if batch_size == 0 {
        return Err(TensorError::InvalidArgument {
            reason: "batch size must be at least 1",
        });
    }
    let mut pairs = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let a = rng.index(n);
        // uniform over the n-1 indices different from a
        let mut b = rng.index(n - 1);
        if b >= a {
            b += 1;
        }
        let y = u8::from(labels[a] == labels[b]);
        pairs.push(Pair { a, b, y });
    }
    Ok(PairBatch { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_batch() {
        let labels = [0u8, 0, 1, 1, 2, 2];
        let b1 = sample_pairs(&labels, 50, &mut SeedStream::new(9)).unwrap();
        let b2 = sample_pairs(&labels, 50, &mut SeedStream::new(9)).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn labels_match_class_equality_and_no_self_pairs() {
        let labels = [0u8, 1, 2, 0, 1, 2, 3, 3];
        let batch = sample_pairs(&labels, 500, &mut SeedStream::new(1)).unwrap();
        assert_eq!(batch.len(), 500);
        for p in &batch.pairs {
            assert_ne!(p.a, p.b);
            assert_eq!(p.y, u8::from(labels[p.a] == labels[p.b]));
        }
    }

    #[test]
    fn single_class_set_yields_all_positive() {
        let labels = [4u8; 10];
        let batch = sample_pairs(&labels, 100, &mut SeedStream::new(2)).unwrap();
        assert!(batch.pairs.iter().all(|p| p.y == 1));
    }

    #[test]
    fn too_few_trials_rejected() {
        assert!(sample_pairs(&[0u8], 10, &mut SeedStream::new(3)).is_err());
        assert!(sample_pairs(&[], 10, &mut SeedStream::new(3)).is_err());
    }

    #[test]
    fn pairing_is_roughly_uniform() {
        // 6 balanced classes: P(same class) = (n/6 - 1)/(n - 1) ≈ 1/6
        let labels: Vec<u8> = (0..240).map(|i| (i % 6) as u8).collect();
        let batch = sample_pairs(&labels, 20_000, &mut SeedStream::new(4)).unwrap();
        let positives = batch.pairs.iter().filter(|p| p.y == 1).count();
        let rate = positives as f64 / 20_000.0;
        let expected = 39.0 / 239.0;
        assert!((rate - expected).abs() < 0.02, "positive rate {rate}");
    }
}
