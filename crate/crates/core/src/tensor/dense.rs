//! Fully-connected layer: y = W·x + b with row-major weights.

use alloc::vec;
use alloc::vec::Vec;

use super::TensorError;
use crate::simd;

/// Gradients of a dense layer.
#[derive(Clone, Debug)]
pub struct DenseGrad {
    pub input: Option<Vec<f64>>,
    /// Row-major `[out][in]`, same layout as the weights.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

fn check_dims(x_len: usize, w_len: usize, out: usize) -> Result<(), TensorError> {
    if out == 0 || x_len == 0 {
        return Err(TensorError::InvalidArgument {
            reason: "dense layer with empty input or output",
        });
    }
    if w_len != out * x_len {
        return Err(TensorError::BadLength {
            expected: out * x_len,
            got: w_len,
        });
    }
    Ok(())
}

/// W·x + b where `weights` is row-major `[bias.len()][x.len()]`.
pub fn dense(x: &[f64], weights: &[f64], bias: &[f64]) -> Result<Vec<f64>, TensorError> {
    let (n, m) = (x.len(), bias.len());
    check_dims(n, weights.len(), m)?;
    let mut y = vec![0.0; m];
    let mut i = 0;
    while i + 4 <= m {
        let rows = [
            &weights[i * n..(i + 1) * n],
            &weights[(i + 1) * n..(i + 2) * n],
            &weights[(i + 2) * n..(i + 3) * n],
            &weights[(i + 3) * n..(i + 4) * n],
        ];
        let d = simd::dot4(x, rows);
        for r in 0..4 {
            y[i + r] = d[r] + bias[i + r];
        }
        i += 4;
    }
    while i < m {
        y[i] = simd::dot(x, &weights[i * n..(i + 1) * n]) + bias[i];
        i += 1;
    }
    Ok(y)
}

/// Analytic gradients of [`dense`] given the cached input and the upstream
/// gradient (length = output dimension).
pub fn dense_backward(
    x: &[f64],
    weights: &[f64],
    upstream: &[f64],
    want_input_grad: bool,
) -> Result<DenseGrad, TensorError> {
    let (n, m) = (x.len(), upstream.len());
    check_dims(n, weights.len(), m)?;

    let mut grad_w = vec![0.0; weights.len()];
    for i in 0..m {
        simd::axpy(&mut grad_w[i * n..(i + 1) * n], upstream[i], x);
    }

    let grad_input = if want_input_grad {
        let mut gx = vec![0.0; n];
        for i in 0..m {
            simd::axpy(&mut gx, upstream[i], &weights[i * n..(i + 1) * n]);
        }
        Some(gx)
    } else {
        None
    };

    Ok(DenseGrad {
        input: grad_input,
        weights: grad_w,
        bias: upstream.to_vec(),
    })
}
