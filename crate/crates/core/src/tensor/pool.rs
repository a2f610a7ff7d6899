//! Max-pooling with recorded argmax routing for the backward pass.

use alloc::vec;
use alloc::vec::Vec;

use super::{Tensor3, TensorError};

/// Padding interpretation for a pooling layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolPadding {
    /// No padding; output = floor((in - k)/stride) + 1.
    Valid,
    /// Ceil-mode: output = ceil((in - k)/stride) + 1; the last window may
    /// overhang the input. Overhanging cells never win the max.
    Ceil,
    /// Stride must be 1; the input is padded so the output has the input's
    /// size. Padding splits as (k-1)/2 before, the remainder after.
    SameStride1,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolGeometry {
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
    pub padding: PoolPadding,
}

impl PoolGeometry {
    pub fn new(
        kernel_h: usize,
        kernel_w: usize,
        stride_h: usize,
        stride_w: usize,
        padding: PoolPadding,
    ) -> Self {
        Self {
            kernel_h,
            kernel_w,
            stride_h,
            stride_w,
            padding,
        }
    }

    fn axis_output(&self, input: usize, kernel: usize, stride: usize) -> Result<usize, TensorError> {
        if kernel == 0 || stride == 0 {
            return Err(TensorError::InvalidGeometry {
                reason: "zero pool kernel or stride",
            });
        }
        if input == 0 {
            return Err(TensorError::InvalidGeometry {
                reason: "empty pool input",
            });
        }
        match self.padding {
            PoolPadding::Valid => {
                if kernel > input {
                    return Err(TensorError::InvalidGeometry {
                        reason: "pool window larger than input",
                    });
                }
                Ok((input - kernel) / stride + 1)
            }
            PoolPadding::Ceil => {
                if kernel > input {
                    return Err(TensorError::InvalidGeometry {
                        reason: "pool window larger than input",
                    });
                }
                let mut out = (input - kernel).div_ceil(stride) + 1;
                // last window must start inside the input
                if (out - 1) * stride >= input {
                    out -= 1;
                }
                Ok(out)
            }
            PoolPadding::SameStride1 => {
                if stride != 1 {
                    return Err(TensorError::InvalidGeometry {
                        reason: "same-size pooling requires stride 1",
                    });
                }
                Ok(input)
            }
        }
    }

    /// Padding inserted before the axis origin.
    fn axis_pad_before(&self, kernel: usize) -> usize {
        match self.padding {
            PoolPadding::SameStride1 => (kernel - 1) / 2,
            _ => 0,
        }
    }

    pub fn output_shape(&self, in_h: usize, in_w: usize) -> Result<(usize, usize), TensorError> {
        Ok((
            self.axis_output(in_h, self.kernel_h, self.stride_h)?,
            self.axis_output(in_w, self.kernel_w, self.stride_w)?,
        ))
    }
}

/// For each output cell, the flat index of the input element that produced
/// its maximum. Carries the input shape so the backward pass can rebuild the
/// gradient tensor.
#[derive(Clone, Debug)]
pub struct ArgmaxMap {
    input_shape: (usize, usize, usize),
    output_shape: (usize, usize, usize),
    indices: Vec<usize>,
}

impl ArgmaxMap {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        self.input_shape
    }
}

/// Per-window maximum. Ties go to the first cell in row-major window scan
/// order; padding cells (same-size or ceil overhang) never win.
pub fn maxpool(input: &Tensor3, geom: &PoolGeometry) -> Result<(Tensor3, ArgmaxMap), TensorError> {
    let (in_h, in_w, c) = input.shape();
    let (out_h, out_w) = geom.output_shape(in_h, in_w)?;
    let pad_top = geom.axis_pad_before(geom.kernel_h);
    let pad_left = geom.axis_pad_before(geom.kernel_w);

    let mut out = Tensor3::zeros(out_h, out_w, c);
    let mut indices = vec![0usize; out_h * out_w * c];
    let mut best = vec![f64::NEG_INFINITY; c];
    let mut best_idx = vec![0usize; c];

    for oy in 0..out_h {
        let iy0 = (oy * geom.stride_h) as isize - pad_top as isize;
        for ox in 0..out_w {
            let ix0 = (ox * geom.stride_w) as isize - pad_left as isize;
            best.iter_mut().for_each(|b| *b = f64::NEG_INFINITY);
            let mut any = false;
            for ky in 0..geom.kernel_h {
                let iy = iy0 + ky as isize;
                if iy < 0 || iy >= in_h as isize {
                    continue;
                }
                for kx in 0..geom.kernel_w {
                    let ix = ix0 + kx as isize;
                    if ix < 0 || ix >= in_w as isize {
                        continue;
                    }
                    any = true;
                    let base = input.flat_index(iy as usize, ix as usize, 0);
                    for ch in 0..c {
                        let v = input.data()[base + ch];
                        if v > best[ch] {
                            best[ch] = v;
                            best_idx[ch] = base + ch;
                        }
                    }
                }
            }
            if !any {
                return Err(TensorError::InvalidGeometry {
                    reason: "pool window contains no input cells",
                });
            }
            let out_base = (oy * out_w + ox) * c;
            for ch in 0..c {
                out.data_mut()[out_base + ch] = best[ch];
                indices[out_base + ch] = best_idx[ch];
            }
        }
    }

    Ok((
        out,
        ArgmaxMap {
            input_shape: (in_h, in_w, c),
            output_shape: (out_h, out_w, c),
            indices,
        },
    ))
}

/// Routes each upstream gradient to the input element recorded in the
/// argmax map. Overlapping windows accumulate.
pub fn maxpool_backward(argmax: &ArgmaxMap, upstream: &Tensor3) -> Result<Tensor3, TensorError> {
    if upstream.shape() != argmax.output_shape {
        return Err(TensorError::DimensionMismatch {
            context: "maxpool upstream gradient",
            expected: argmax.indices.len(),
            got: upstream.len(),
        });
    }
    let (h, w, c) = argmax.input_shape;
    let mut grad = Tensor3::zeros(h, w, c);
    for (&idx, &g) in argmax.indices.iter().zip(upstream.data()) {
        grad.data_mut()[idx] += g;
    }
    Ok(grad)
}
