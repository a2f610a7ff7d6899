//! The weight-shared Siamese encoder: three convolution/ReLU/maxpool stages
//! followed by four dense layers down to an 8-dimensional embedding, with
//! contrastive training on sampled trial pairs.

mod adam;
pub(crate) mod gemm;
mod loss;
mod pairs;
mod train;

pub use adam::{adam_step, AdamHyper, AdamState, NonFiniteGrad};
pub use loss::{contrastive_loss, contrastive_loss_grad, euclidean_distance};
pub use pairs::{sample_pairs, Pair, PairBatch};
pub use train::{pair_grad, train, TrainConfig, TrainError, TrainWarning};

use alloc::vec::Vec;

use crate::data::Trial;
use crate::rng::SeedStream;
use crate::tensor::{
    conv2d, conv2d_backward, dense, flatten, maxpool, maxpool_backward, relu, relu_backward,
    relu_slice, unflatten, ArgmaxMap, ConvGeometry, PoolGeometry, PoolPadding, Tensor3,
    TensorError,
};

/// Embedding dimensionality produced by the final dense layer.
pub const EMBED_DIM: usize = 8;

/// One encoded trial.
pub type Embedding = [f64; EMBED_DIM];

const CONV1_CHANNELS: usize = 64;
const CONV2_CHANNELS: usize = 128;
const CONV3_CHANNELS: usize = 128;
const FC_OUT: [usize; 4] = [1024, 512, 256, EMBED_DIM];

/// Layer geometries and derived activation shapes for a given input size.
///
/// The canonical input is 6 channels × 512 samples; the width is
/// parameterized so small variants of the same architecture can be built
/// for exhaustive gradient checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderGeometry {
    pub in_h: usize,
    pub in_w: usize,
    pub conv1: ConvGeometry,
    pub pool1: PoolGeometry,
    pub conv2: ConvGeometry,
    pub pool2: PoolGeometry,
    pub conv3: ConvGeometry,
    pub pool3: PoolGeometry,
    pub conv1_out: (usize, usize),
    pub pool1_out: (usize, usize),
    pub pool2_out: (usize, usize),
    pub pool3_out: (usize, usize),
    pub flatten_len: usize,
    /// Dense chain dimensions: input followed by the four layer outputs.
    pub fc_dims: [usize; 5],
}

impl EncoderGeometry {
    /// Geometry for a trial of `in_h` channels × `in_w` samples.
    pub fn for_input(in_h: usize, in_w: usize) -> Result<Self, TensorError> {
        let conv1 = ConvGeometry {
            kernel_h: 5,
            kernel_w: 5,
            stride_h: 1,
            stride_w: 5,
            pad_top: 0,
            pad_bottom: 0,
            pad_left: 1,
            pad_right: 2,
            out_channels: CONV1_CHANNELS,
        };
        let pool1 = PoolGeometry::new(2, 2, 2, 2, PoolPadding::Ceil);
        let conv2 = ConvGeometry {
            kernel_h: 1,
            kernel_w: 3,
            stride_h: 1,
            stride_w: 1,
            pad_top: 0,
            pad_bottom: 0,
            pad_left: 1,
            pad_right: 1,
            out_channels: CONV2_CHANNELS,
        };
        let pool2 = PoolGeometry::new(1, 3, 1, 1, PoolPadding::SameStride1);
        let conv3 = ConvGeometry {
            kernel_h: 1,
            kernel_w: 2,
            stride_h: 1,
            stride_w: 1,
            pad_top: 0,
            pad_bottom: 0,
            pad_left: 0,
            pad_right: 1,
            out_channels: CONV3_CHANNELS,
        };
        let pool3 = PoolGeometry::new(1, 2, 1, 1, PoolPadding::SameStride1);

        let conv1_out = conv1.output_shape(in_h, in_w)?;
        let pool1_out = pool1.output_shape(conv1_out.0, conv1_out.1)?;
        let conv2_out = conv2.output_shape(pool1_out.0, pool1_out.1)?;
        let pool2_out = pool2.output_shape(conv2_out.0, conv2_out.1)?;
        let conv3_out = conv3.output_shape(pool2_out.0, pool2_out.1)?;
        let pool3_out = pool3.output_shape(conv3_out.0, conv3_out.1)?;
        let flatten_len = pool3_out.0 * pool3_out.1 * CONV3_CHANNELS;
        let fc_dims = [flatten_len, FC_OUT[0], FC_OUT[1], FC_OUT[2], FC_OUT[3]];

        Ok(Self {
            in_h,
            in_w,
            conv1,
            pool1,
            conv2,
            pool2,
            conv3,
            pool3,
            conv1_out,
            pool1_out,
            pool2_out,
            pool3_out,
            flatten_len,
            fc_dims,
        })
    }

    /// The published 6 × 512 architecture.
    pub fn standard() -> Self {
        Self::for_input(6, 512).expect("standard geometry is valid")
    }

    pub fn trial_len(&self) -> usize {
        self.in_h * self.in_w
    }
}

/// One named tensor inside the flat parameter buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSegment {
    pub name: &'static str,
    pub offset: usize,
    pub dims: Vec<usize>,
}

impl ParamSegment {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Fixed-order description of every parameter tensor (the checkpoint order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    segments: Vec<ParamSegment>,
    total: usize,
}

pub(crate) const SEG_CONV1_K: usize = 0;
pub(crate) const SEG_CONV1_B: usize = 1;
pub(crate) const SEG_CONV2_K: usize = 2;
pub(crate) const SEG_CONV2_B: usize = 3;
pub(crate) const SEG_CONV3_K: usize = 4;
pub(crate) const SEG_CONV3_B: usize = 5;
pub(crate) const SEG_FC_W: [usize; 4] = [6, 8, 10, 12];
pub(crate) const SEG_FC_B: [usize; 4] = [7, 9, 11, 13];

impl ParamLayout {
    fn for_geometry(geom: &EncoderGeometry) -> Self {
        let mut segments = Vec::with_capacity(14);
        let mut offset = 0;
        let mut push = |name: &'static str, dims: Vec<usize>| {
            let len: usize = dims.iter().product();
            segments.push(ParamSegment { name, offset, dims });
            offset += len;
        };
        push("conv1.kernels", alloc::vec![CONV1_CHANNELS, 5, 5, 1]);
        push("conv1.bias", alloc::vec![CONV1_CHANNELS]);
        push("conv2.kernels", alloc::vec![CONV2_CHANNELS, 1, 3, CONV1_CHANNELS]);
        push("conv2.bias", alloc::vec![CONV2_CHANNELS]);
        push("conv3.kernels", alloc::vec![CONV3_CHANNELS, 1, 2, CONV2_CHANNELS]);
        push("conv3.bias", alloc::vec![CONV3_CHANNELS]);
        let names_w = ["fc1.weights", "fc2.weights", "fc3.weights", "fc4.weights"];
        let names_b = ["fc1.bias", "fc2.bias", "fc3.bias", "fc4.bias"];
        for l in 0..4 {
            push(names_w[l], alloc::vec![geom.fc_dims[l + 1], geom.fc_dims[l]]);
            push(names_b[l], alloc::vec![geom.fc_dims[l + 1]]);
        }
        Self {
            total: offset,
            segments,
        }
    }

    pub fn segments(&self) -> &[ParamSegment] {
        &self.segments
    }

    pub fn total_len(&self) -> usize {
        self.total
    }

    /// Map a flat parameter index to (tensor name, index within tensor).
    pub fn locate(&self, flat: usize) -> (&'static str, usize) {
        for seg in self.segments.iter().rev() {
            if flat >= seg.offset {
                return (seg.name, flat - seg.offset);
            }
        }
        ("", flat)
    }

    fn range(&self, idx: usize) -> core::ops::Range<usize> {
        let seg = &self.segments[idx];
        seg.offset..seg.offset + seg.len()
    }
}

/// All kernels, biases, and dense weights of the encoder in one flat,
/// checkpoint-ordered buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    geom: EncoderGeometry,
    layout: ParamLayout,
    data: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(geom: EncoderGeometry) -> Self {
        let layout = ParamLayout::for_geometry(&geom);
        let data = alloc::vec![0.0; layout.total_len()];
        Self { geom, layout, data }
    }

    /// He-scaled normal initialization (σ = √(2/fan_in)) with zero biases,
    /// fully determined by the seed.
    pub fn init_he(geom: EncoderGeometry, seed: u64) -> Self {
        let mut p = Self::zeros(geom);
        let mut rng = SeedStream::new(seed).derive(0);
        let fan_in = [
            5 * 5 * 1,
            0,
            1 * 3 * CONV1_CHANNELS,
            0,
            1 * 2 * CONV2_CHANNELS,
            0,
            p.geom.fc_dims[0],
            0,
            p.geom.fc_dims[1],
            0,
            p.geom.fc_dims[2],
            0,
            p.geom.fc_dims[3],
            0,
        ];
        for (idx, fan) in fan_in.iter().enumerate() {
            if *fan == 0 {
                continue; // biases stay zero
            }
            let sigma = crate::math::sqrt(2.0 / *fan as f64);
            let range = p.layout.range(idx);
            for v in &mut p.data[range] {
                *v = sigma * rng.normal();
            }
        }
        p
    }

    /// Rebuild from checkpoint tensors, validating every shape against the
    /// geometry.
    pub fn from_tensors(
        geom: EncoderGeometry,
        tensors: &[(Vec<usize>, Vec<f64>)],
    ) -> Result<Self, TensorError> {
        let mut p = Self::zeros(geom);
        if tensors.len() != p.layout.segments.len() {
            return Err(TensorError::DimensionMismatch {
                context: "parameter tensor count",
                expected: p.layout.segments.len(),
                got: tensors.len(),
            });
        }
        for (idx, (dims, values)) in tensors.iter().enumerate() {
            let seg = &p.layout.segments[idx];
            if dims != &seg.dims {
                return Err(TensorError::DimensionMismatch {
                    context: "parameter tensor shape",
                    expected: seg.len(),
                    got: values.len(),
                });
            }
            if values.len() != seg.len() {
                return Err(TensorError::BadLength {
                    expected: seg.len(),
                    got: values.len(),
                });
            }
            let range = p.layout.range(idx);
            p.data[range].copy_from_slice(values);
        }
        Ok(p)
    }

    pub fn geometry(&self) -> &EncoderGeometry {
        &self.geom
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn seg(&self, idx: usize) -> &[f64] {
        &self.data[self.layout.range(idx)]
    }

    pub fn fc_weights(&self, layer: usize) -> &[f64] {
        self.seg(SEG_FC_W[layer])
    }

    pub fn fc_bias(&self, layer: usize) -> &[f64] {
        self.seg(SEG_FC_B[layer])
    }

    fn trial_tensor(&self, trial: &[f64]) -> Result<Tensor3, TensorError> {
        if trial.len() != self.geom.trial_len() {
            return Err(TensorError::BadLength {
                expected: self.geom.trial_len(),
                got: trial.len(),
            });
        }
        Tensor3::from_vec(self.geom.in_h, self.geom.in_w, 1, trial.to_vec())
    }

    /// Convolutional front half: trial → flattened pool3 activation.
    pub fn conv_forward(&self, trial: &[f64]) -> Result<Vec<f64>, TensorError> {
        Ok(self.conv_forward_cached(trial)?.flat)
    }

    pub(crate) fn conv_forward_cached(&self, trial: &[f64]) -> Result<ConvCache, TensorError> {
        let g = &self.geom;
        let input = self.trial_tensor(trial)?;
        let conv1_z = conv2d(&input, self.seg(SEG_CONV1_K), self.seg(SEG_CONV1_B), &g.conv1)?;
        let (pool1_out, pool1_map) = maxpool(&relu(&conv1_z), &g.pool1)?;
        let conv2_z = conv2d(
            &pool1_out,
            self.seg(SEG_CONV2_K),
            self.seg(SEG_CONV2_B),
            &g.conv2,
        )?;
        let (pool2_out, pool2_map) = maxpool(&relu(&conv2_z), &g.pool2)?;
        let conv3_z = conv2d(
            &pool2_out,
            self.seg(SEG_CONV3_K),
            self.seg(SEG_CONV3_B),
            &g.conv3,
        )?;
        let (pool3_out, pool3_map) = maxpool(&relu(&conv3_z), &g.pool3)?;
        let flat = flatten(&pool3_out);
        Ok(ConvCache {
            input,
            conv1_z,
            pool1_map,
            pool1_out,
            conv2_z,
            pool2_map,
            pool2_out,
            conv3_z,
            pool3_map,
            flat,
        })
    }

    /// Full forward pass: Conv1→ReLU→Maxpool1→…→FC4 (→ReLU when
    /// `final_relu`).
    pub fn forward(&self, trial: &[f64], final_relu: bool) -> Result<Embedding, TensorError> {
        let mut v = self.conv_forward(trial)?;
        for layer in 0..4 {
            v = dense(&v, self.fc_weights(layer), self.fc_bias(layer))?;
            if layer < 3 || final_relu {
                v = relu_slice(&v);
            }
        }
        let mut e = [0.0; EMBED_DIM];
        e.copy_from_slice(&v);
        Ok(e)
    }

    /// Backward pass through the convolutional front half given the gradient
    /// with respect to the flattened pool3 activation; accumulates parameter
    /// gradients into `acc`.
    pub(crate) fn conv_backward_cached(
        &self,
        cache: &ConvCache,
        flat_grad: &[f64],
        acc: &mut ConvGrads,
    ) -> Result<(), TensorError> {
        let g = &self.geom;
        let (p3h, p3w) = g.pool3_out;
        let up = unflatten(flat_grad.to_vec(), p3h, p3w, CONV3_CHANNELS)?;
        let up = maxpool_backward(&cache.pool3_map, &up)?;
        let up = relu_backward(&cache.conv3_z, &up)?;
        let cg3 = conv2d_backward(&cache.pool2_out, self.seg(SEG_CONV3_K), &g.conv3, &up, true)?;
        crate::simd::add_assign(&mut acc.conv3_k, &cg3.kernels);
        crate::simd::add_assign(&mut acc.conv3_b, &cg3.bias);

        let up = maxpool_backward(&cache.pool2_map, &cg3.input.expect("input grad requested"))?;
        let up = relu_backward(&cache.conv2_z, &up)?;
        let cg2 = conv2d_backward(&cache.pool1_out, self.seg(SEG_CONV2_K), &g.conv2, &up, true)?;
        crate::simd::add_assign(&mut acc.conv2_k, &cg2.kernels);
        crate::simd::add_assign(&mut acc.conv2_b, &cg2.bias);

        let up = maxpool_backward(&cache.pool1_map, &cg2.input.expect("input grad requested"))?;
        let up = relu_backward(&cache.conv1_z, &up)?;
        let cg1 = conv2d_backward(&cache.input, self.seg(SEG_CONV1_K), &g.conv1, &up, false)?;
        crate::simd::add_assign(&mut acc.conv1_k, &cg1.kernels);
        crate::simd::add_assign(&mut acc.conv1_b, &cg1.bias);
        Ok(())
    }
}

/// Cached activations of the convolutional front half for one trial.
pub(crate) struct ConvCache {
    input: Tensor3,
    conv1_z: Tensor3,
    pool1_map: ArgmaxMap,
    pool1_out: Tensor3,
    conv2_z: Tensor3,
    pool2_map: ArgmaxMap,
    pool2_out: Tensor3,
    conv3_z: Tensor3,
    pool3_map: ArgmaxMap,
    pub(crate) flat: Vec<f64>,
}

/// Accumulator for convolutional parameter gradients.
pub(crate) struct ConvGrads {
    pub conv1_k: Vec<f64>,
    pub conv1_b: Vec<f64>,
    pub conv2_k: Vec<f64>,
    pub conv2_b: Vec<f64>,
    pub conv3_k: Vec<f64>,
    pub conv3_b: Vec<f64>,
}

impl ConvGrads {
    pub(crate) fn zeros(layout: &ParamLayout) -> Self {
        let len = |idx: usize| layout.segments[idx].len();
        Self {
            conv1_k: alloc::vec![0.0; len(SEG_CONV1_K)],
            conv1_b: alloc::vec![0.0; len(SEG_CONV1_B)],
            conv2_k: alloc::vec![0.0; len(SEG_CONV2_K)],
            conv2_b: alloc::vec![0.0; len(SEG_CONV2_B)],
            conv3_k: alloc::vec![0.0; len(SEG_CONV3_K)],
            conv3_b: alloc::vec![0.0; len(SEG_CONV3_B)],
        }
    }

    pub(crate) fn add(&mut self, other: &Self) {
        crate::simd::add_assign(&mut self.conv1_k, &other.conv1_k);
        crate::simd::add_assign(&mut self.conv1_b, &other.conv1_b);
        crate::simd::add_assign(&mut self.conv2_k, &other.conv2_k);
        crate::simd::add_assign(&mut self.conv2_b, &other.conv2_b);
        crate::simd::add_assign(&mut self.conv3_k, &other.conv3_k);
        crate::simd::add_assign(&mut self.conv3_b, &other.conv3_b);
    }

    /// Scatter into a flat gradient buffer laid out by `layout`.
    pub(crate) fn add_into_flat(&self, layout: &ParamLayout, flat: &mut [f64]) {
        let mut put = |idx: usize, src: &[f64]| {
            let seg = &layout.segments[idx];
            crate::simd::add_assign(&mut flat[seg.offset..seg.offset + src.len()], src);
        };
        put(SEG_CONV1_K, &self.conv1_k);
        put(SEG_CONV1_B, &self.conv1_b);
        put(SEG_CONV2_K, &self.conv2_k);
        put(SEG_CONV2_B, &self.conv2_b);
        put(SEG_CONV3_K, &self.conv3_k);
        put(SEG_CONV3_B, &self.conv3_b);
    }
}

/// Encodes every trial, preserving order; returns (embedding, class label).
pub fn embed_dataset(
    params: &EncoderParams,
    trials: &[Trial],
    final_relu: bool,
) -> Result<Vec<(Embedding, u8)>, TensorError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        trials
            .par_iter()
            .map(|t| Ok((params.forward(&t.data, final_relu)?, t.label)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        trials
            .iter()
            .map(|t| Ok((params.forward(&t.data, final_relu)?, t.label)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_geometry_reproduces_published_shapes() {
        let g = EncoderGeometry::standard();
        assert_eq!(g.conv1_out, (2, 103));
        assert_eq!(g.pool1_out, (1, 52));
        assert_eq!(g.pool2_out, (1, 52));
        assert_eq!(g.pool3_out, (1, 52));
        assert_eq!(g.flatten_len, 6656);
        assert_eq!(g.fc_dims, [6656, 1024, 512, 256, 8]);
    }

    #[test]
    fn layout_matches_declared_tensor_shapes() {
        let g = EncoderGeometry::standard();
        let p = EncoderParams::zeros(g);
        let names: Vec<&str> = p.layout().segments().iter().map(|s| s.name).collect();
        assert_eq!(
            names,
            [
                "conv1.kernels",
                "conv1.bias",
                "conv2.kernels",
                "conv2.bias",
                "conv3.kernels",
                "conv3.bias",
                "fc1.weights",
                "fc1.bias",
                "fc2.weights",
                "fc2.bias",
                "fc3.weights",
                "fc3.bias",
                "fc4.weights",
                "fc4.bias"
            ]
        );
        assert_eq!(p.layout().segments()[6].dims, vec![1024, 6656]);
        let (name, inner) = p.layout().locate(p.layout().segments()[6].offset + 3);
        assert_eq!((name, inner), ("fc1.weights", 3));
    }

    #[test]
    fn forward_produces_embedding_of_length_eight() {
        // small-width variant keeps the test fast; the dense chain is identical
        let g = EncoderGeometry::for_input(6, 32).unwrap();
        let p = EncoderParams::init_he(g, 7);
        let trial: Vec<f64> = (0..p.geometry().trial_len())
            .map(|i| (i as f64 * 0.01).sin())
            .collect();
        let e = p.forward(&trial, true).unwrap();
        assert_eq!(e.len(), EMBED_DIM);
        assert!(e.iter().all(|v| v.is_finite()));
        // final ReLU makes embeddings nonnegative
        assert!(e.iter().all(|&v| v >= 0.0));
        // identical inputs → identical embeddings → D = 0
        let e2 = p.forward(&trial, true).unwrap();
        assert_eq!(e, e2);
        assert_eq!(euclidean_distance(&e, &e2).unwrap(), 0.0);
    }

    #[test]
    fn flatten_activation_has_expected_length() {
        let g = EncoderGeometry::standard();
        let p = EncoderParams::init_he(g, 1);
        let trial = alloc::vec![0.25; p.geometry().trial_len()];
        let flat = p.conv_forward(&trial).unwrap();
        assert_eq!(flat.len(), 6656);
    }

    #[test]
    fn init_is_seed_deterministic() {
        let g = EncoderGeometry::for_input(6, 32).unwrap();
        let a = EncoderParams::init_he(g.clone(), 99);
        let b = EncoderParams::init_he(g, 99);
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn wrong_trial_length_rejected() {
        let p = EncoderParams::init_he(EncoderGeometry::for_input(6, 32).unwrap(), 0);
        assert!(matches!(
            p.forward(&[0.0; 10], true),
            Err(TensorError::BadLength { .. })
        ));
    }
}
