//! Dense rank-3 tensors and the layer operations of the encoder: 2-D
//! convolution, max-pooling, ReLU, dense layers, and flatten, each with an
//! exact analytic backward pass and a finite-difference checker.
//!
//! All operations are pure functions with pinned accumulation orders, so
//! forward and backward results are bit-reproducible.

mod conv;
mod dense;
mod gradcheck;
mod pool;

pub use conv::{conv2d, conv2d_backward, ConvGeometry, ConvGrad};
pub use dense::{dense, dense_backward, DenseGrad};
pub use gradcheck::grad_check;
pub use pool::{maxpool, maxpool_backward, ArgmaxMap, PoolGeometry, PoolPadding};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Rank-3 real tensor in row-major (height, width, channel) order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn from_vec(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, TensorError> {
        if data.len() != height * width * channels {
            return Err(TensorError::BadLength {
                expected: height * width * channels,
                got: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline(always)]
    pub fn flat_index(&self, y: usize, x: usize, ch: usize) -> usize {
        (y * self.width + x) * self.channels + ch
    }

    #[inline(always)]
    pub fn get(&self, y: usize, x: usize, ch: usize) -> f64 {
        self.data[self.flat_index(y, x, ch)]
    }

    #[inline(always)]
    pub fn set(&mut self, y: usize, x: usize, ch: usize, value: f64) {
        let idx = self.flat_index(y, x, ch);
        self.data[idx] = value;
    }

    /// Contiguous slice covering `cells` consecutive cells of row `y`
    /// starting at column `x0` (all channels).
    #[inline(always)]
    pub fn span(&self, y: usize, x0: usize, cells: usize) -> &[f64] {
        let start = (y * self.width + x0) * self.channels;
        &self.data[start..start + cells * self.channels]
    }

    #[inline(always)]
    pub fn span_mut(&mut self, y: usize, x0: usize, cells: usize) -> &mut [f64] {
        let start = (y * self.width + x0) * self.channels;
        &mut self.data[start..start + cells * self.channels]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Errors reported by tensor operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TensorError {
    /// Buffer length disagrees with the declared shape.
    BadLength { expected: usize, got: usize },
    /// A dimension does not match its counterpart.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// Geometry cannot produce a valid output (zero stride, empty output,
    /// window larger than the padded input, ...).
    InvalidGeometry { reason: &'static str },
    /// An argument is outside its domain.
    InvalidArgument { reason: &'static str },
    /// A non-finite value was found where finite math is required.
    NonFinite { context: &'static str },
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::BadLength { expected, got } => {
                write!(f, "buffer length {got} does not match shape ({expected} expected)")
            }
            TensorError::DimensionMismatch {
                context,
                expected,
                got,
            } => write!(f, "{context}: dimension {got} does not match {expected}"),
            TensorError::InvalidGeometry { reason } => write!(f, "invalid geometry: {reason}"),
            TensorError::InvalidArgument { reason } => write!(f, "invalid argument: {reason}"),
            TensorError::NonFinite { context } => write!(f, "non-finite value in {context}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TensorError {}

/// Elementwise max(x, 0) on a slice.
pub fn relu_slice(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

/// Gradient of [`relu_slice`]: passes `upstream` where the cached input was
/// strictly positive. The derivative at exactly zero is defined as zero.
pub fn relu_backward_slice(input: &[f64], upstream: &[f64]) -> Result<Vec<f64>, TensorError> {
    if input.len() != upstream.len() {
        return Err(TensorError::DimensionMismatch {
            context: "relu backward",
            expected: input.len(),
            got: upstream.len(),
        });
    }
    Ok(input
        .iter()
        .zip(upstream)
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect())
}

/// Elementwise max(x, 0).
pub fn relu(input: &Tensor3) -> Tensor3 {
    let (h, w, c) = input.shape();
    Tensor3 {
        height: h,
        width: w,
        channels: c,
        data: relu_slice(input.data()),
    }
}

/// Gradient of [`relu`] given the cached forward input.
pub fn relu_backward(input: &Tensor3, upstream: &Tensor3) -> Result<Tensor3, TensorError> {
    if input.shape() != upstream.shape() {
        return Err(TensorError::DimensionMismatch {
            context: "relu backward",
            expected: input.len(),
            got: upstream.len(),
        });
    }
    let (h, w, c) = input.shape();
    Ok(Tensor3 {
        height: h,
        width: w,
        channels: c,
        data: relu_backward_slice(input.data(), upstream.data())?,
    })
}

/// Row-major linearization.
pub fn flatten(input: &Tensor3) -> Vec<f64> {
    input.data.clone()
}

/// Inverse of [`flatten`] for a declared shape.
pub fn unflatten(
    values: Vec<f64>,
    height: usize,
    width: usize,
    channels: usize,
) -> Result<Tensor3, TensorError> {
    Tensor3::from_vec(height, width, channels, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        assert_eq!(relu_slice(&[-1.0, 0.0, 2.0]), vec![0.0, 0.0, 2.0]);
        assert_eq!(relu_slice(&[1.0, 3.5]), vec![1.0, 3.5]);
        assert_eq!(relu_slice(&[-1.0, -0.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn relu_backward_gates_by_cached_sign() {
        let g = relu_backward_slice(&[-1.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g, vec![0.0, 1.0]);
        // derivative at exactly 0 is 0
        let g = relu_backward_slice(&[0.0], &[5.0]).unwrap();
        assert_eq!(g, vec![0.0]);
    }

    #[test]
    fn flatten_is_row_major() {
        let t = Tensor3::from_vec(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(flatten(&t), vec![1.0, 2.0, 3.0, 4.0]);
        let single = Tensor3::from_vec(1, 1, 1, vec![7.5]).unwrap();
        assert_eq!(flatten(&single), vec![7.5]);
    }

    #[test]
    fn flatten_unflatten_roundtrip() {
        let t = Tensor3::from_vec(2, 3, 2, (0..12).map(|i| i as f64).collect()).unwrap();
        let back = unflatten(flatten(&t), 2, 3, 2).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(matches!(
            Tensor3::from_vec(2, 2, 1, vec![0.0; 3]),
            Err(TensorError::BadLength { expected: 4, got: 3 })
        ));
    }
}
