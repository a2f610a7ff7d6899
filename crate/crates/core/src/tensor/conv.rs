//! 2-D convolution (cross-correlation, no kernel flip) with asymmetric
//! zero padding and per-axis strides.

use alloc::vec;
use alloc::vec::Vec;

use super::{Tensor3, TensorError};
use crate::simd;

/// Geometry of one convolution layer.
///
/// The output shape is `floor((in + pad_before + pad_after - kernel) /
/// stride) + 1` per axis and must be at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvGeometry {
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
    pub pad_top: usize,
    pub pad_bottom: usize,
    pub pad_left: usize,
    pub pad_right: usize,
    pub out_channels: usize,
}

impl ConvGeometry {
    /// Unpadded, stride-1 geometry.
    pub fn valid(kernel_h: usize, kernel_w: usize, out_channels: usize) -> Self {
        Self {
            kernel_h,
            kernel_w,
            stride_h: 1,
            stride_w: 1,
            pad_top: 0,
            pad_bottom: 0,
            pad_left: 0,
            pad_right: 0,
            out_channels,
        }
    }

    pub fn output_shape(&self, in_h: usize, in_w: usize) -> Result<(usize, usize), TensorError> {
        if self.kernel_h == 0 || self.kernel_w == 0 {
            return Err(TensorError::InvalidGeometry {
                reason: "zero kernel size",
            });
        }
        if self.stride_h == 0 || self.stride_w == 0 {
            return Err(TensorError::InvalidGeometry {
                reason: "zero stride",
            });
        }
        if self.out_channels == 0 {
            return Err(TensorError::InvalidGeometry {
                reason: "zero output channels",
            });
        }
        let padded_h = in_h + self.pad_top + self.pad_bottom;
        let padded_w = in_w + self.pad_left + self.pad_right;
        if padded_h < self.kernel_h || padded_w < self.kernel_w {
            return Err(TensorError::InvalidGeometry {
                reason: "kernel larger than padded input",
            });
        }
        Ok((
            (padded_h - self.kernel_h) / self.stride_h + 1,
            (padded_w - self.kernel_w) / self.stride_w + 1,
        ))
    }

    fn kernel_len(&self, in_channels: usize) -> usize {
        self.out_channels * self.kernel_h * self.kernel_w * in_channels
    }
}

/// Gradients of a convolution layer.
#[derive(Clone, Debug)]
pub struct ConvGrad {
    /// Gradient with respect to the layer input; `None` when the caller
    /// asked to skip it (first layer of a network).
    pub input: Option<Tensor3>,
    /// Same layout as the kernels: `[out_c][kernel_h][kernel_w][in_c]`.
    pub kernels: Vec<f64>,
    pub bias: Vec<f64>,
}

fn check_conv_args(
    input: &Tensor3,
    kernels: &[f64],
    bias: &[f64],
    geom: &ConvGeometry,
) -> Result<(usize, usize), TensorError> {
    let (in_h, in_w, in_c) = input.shape();
    if kernels.len() != geom.kernel_len(in_c) {
        return Err(TensorError::BadLength {
            expected: geom.kernel_len(in_c),
            got: kernels.len(),
        });
    }
    if bias.len() != geom.out_channels {
        return Err(TensorError::DimensionMismatch {
            context: "conv bias",
            expected: geom.out_channels,
            got: bias.len(),
        });
    }
    geom.output_shape(in_h, in_w)
}

/// Cross-correlation of `input` with `kernels` plus `bias`.
///
/// Kernels are row-major `[out_c][kernel_h][kernel_w][in_c]`.
pub fn conv2d(
    input: &Tensor3,
    kernels: &[f64],
    bias: &[f64],
    geom: &ConvGeometry,
) -> Result<Tensor3, TensorError> {
    let (out_h, out_w) = check_conv_args(input, kernels, bias, geom)?;
    if !input.all_finite() {
        return Err(TensorError::NonFinite {
            context: "conv input",
        });
    }
    if !kernels.iter().all(|v| v.is_finite()) || !bias.iter().all(|v| v.is_finite()) {
        return Err(TensorError::NonFinite {
            context: "conv parameters",
        });
    }

    let (in_h, in_w, in_c) = input.shape();
    let out_c = geom.out_channels;
    let krow = geom.kernel_w * in_c;
    let mut out = Tensor3::zeros(out_h, out_w, out_c);

    for oy in 0..out_h {
        let iy0 = (oy * geom.stride_h) as isize - geom.pad_top as isize;
        for ox in 0..out_w {
            let ix0 = (ox * geom.stride_w) as isize - geom.pad_left as isize;
            // clip the window against the input
            let kx_lo = (-ix0).max(0) as usize;
            let kx_hi = geom.kernel_w.min((in_w as isize - ix0).max(0) as usize);
            let span_cells = kx_hi.saturating_sub(kx_lo);
            let out_base = (oy * out_w + ox) * out_c;

            let cell = |oc: usize| -> f64 {
                let mut acc = 0.0;
                if span_cells > 0 {
                    for ky in 0..geom.kernel_h {
                        let iy = iy0 + ky as isize;
                        if iy < 0 || iy >= in_h as isize {
                            continue;
                        }
                        let x = input.span(iy as usize, (ix0 + kx_lo as isize) as usize, span_cells);
                        let koff = ((oc * geom.kernel_h + ky) * geom.kernel_w + kx_lo) * in_c;
                        acc += simd::dot(x, &kernels[koff..koff + span_cells * in_c]);
                    }
                }
                acc + bias[oc]
            };

            for oc in 0..out_c {
                out.data_mut()[out_base + oc] = cell(oc);
            }
        }
    }
    Ok(out)
}

/// Analytic gradients of [`conv2d`] with respect to input, kernels, and
/// bias, given the cached forward input and the upstream gradient.
pub fn conv2d_backward(
    input: &Tensor3,
    kernels: &[f64],
    geom: &ConvGeometry,
    upstream: &Tensor3,
    want_input_grad: bool,
) -> Result<ConvGrad, TensorError> {
    let (in_h, in_w, in_c) = input.shape();
    let (out_h, out_w) = geom.output_shape(in_h, in_w)?;
    if kernels.len() != geom.kernel_len(in_c) {
        return Err(TensorError::BadLength {
            expected: geom.kernel_len(in_c),
            got: kernels.len(),
        });
    }
    if upstream.shape() != (out_h, out_w, geom.out_channels) {
        return Err(TensorError::DimensionMismatch {
            context: "conv upstream gradient",
            expected: out_h * out_w * geom.out_channels,
            got: upstream.len(),
        });
    }

    let out_c = geom.out_channels;
    let mut grad_kernels = vec![0.0; kernels.len()];
    let mut grad_bias = vec![0.0; out_c];
    let mut grad_input = if want_input_grad {
        Some(Tensor3::zeros(in_h, in_w, in_c))
    } else {
        None
    };

    for oy in 0..out_h {
        let iy0 = (oy * geom.stride_h) as isize - geom.pad_top as isize;
        for ox in 0..out_w {
            let ix0 = (ox * geom.stride_w) as isize - geom.pad_left as isize;
            let kx_lo = (-ix0).max(0) as usize;
            let kx_hi = geom.kernel_w.min((in_w as isize - ix0).max(0) as usize);
            let span_cells = kx_hi.saturating_sub(kx_lo);
            let out_base = (oy * out_w + ox) * out_c;

            for oc in 0..out_c {
                let g = upstream.data()[out_base + oc];
                grad_bias[oc] += g;
                if span_cells == 0 {
                    continue;
                }
                for ky in 0..geom.kernel_h {
                    let iy = iy0 + ky as isize;
                    if iy < 0 || iy >= in_h as isize {
                        continue;
                    }
                    let ix = (ix0 + kx_lo as isize) as usize;
                    let koff = ((oc * geom.kernel_h + ky) * geom.kernel_w + kx_lo) * in_c;
                    let klen = span_cells * in_c;
                    simd::axpy(
                        &mut grad_kernels[koff..koff + klen],
                        g,
                        input.span(iy as usize, ix, span_cells),
                    );
                    if let Some(gi) = grad_input.as_mut() {
                        simd::axpy(
                            gi.span_mut(iy as usize, ix, span_cells),
                            g,
                            &kernels[koff..koff + klen],
                        );
                    }
                }
            }
        }
    }

    Ok(ConvGrad {
        input: grad_input,
        kernels: grad_kernels,
        bias: grad_bias,
    })
}
