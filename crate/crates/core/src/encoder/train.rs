//! Contrastive training loop.
//!
//! Each iteration samples a batch of trial pairs, forwards both branches
//! with the shared parameters, and takes one ADAM step on the mean pair
//! loss. Because backpropagation is linear in the upstream gradient, the
//! engine deduplicates repeated trials within a batch: every distinct trial
//! is forwarded once, its per-pair embedding gradients are summed (in pair
//! order), and one backward pass per distinct trial produces the same total
//! gradient with a fraction of the work. The dense stack runs as blocked
//! matrix products over all distinct trials at once.
//!
//! All accumulation orders are fixed (pair order at the embedding, slot
//! order across trials, pinned dot-product lanes inside), so training is
//! bit-reproducible for a given seed regardless of thread count or SIMD
//! path.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::gemm;
use super::{
    adam_step, contrastive_loss, contrastive_loss_grad, euclidean_distance, sample_pairs,
    AdamHyper, AdamState, ConvGrads, EncoderGeometry, EncoderParams, PairBatch, EMBED_DIM,
    SEG_FC_B, SEG_FC_W,
};
use crate::data::Trial;
use crate::rng::SeedStream;
use crate::simd;
use crate::tensor::{dense, dense_backward, relu_backward_slice, relu_slice, TensorError};

/// Training hyperparameters. Defaults follow the published recipe:
/// margin 0.5, learning rate 1e-4, β = (0.9, 0.99), batch 180 pairs,
/// 1000 iterations, ReLU after every layer including the last.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub rng_seed: u64,
    pub final_relu: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            margin: 0.5,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-8,
            batch_size: 180,
            iterations: 1000,
            rng_seed: 0,
            final_relu: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.margin > 0.0) {
            return Err(TrainError::InvalidConfig {
                reason: "margin must be positive",
            });
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::InvalidConfig {
                reason: "learning rate must be positive",
            });
        }
        for b in [self.beta1, self.beta2] {
            if !(b > 0.0 && b < 1.0) {
                return Err(TrainError::InvalidConfig {
                    reason: "decay factors must lie in (0, 1)",
                });
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(TrainError::InvalidConfig {
                reason: "epsilon must be positive",
            });
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig {
                reason: "batch size must be at least 1",
            });
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamHyper {
        AdamHyper {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    TooFewTrials { got: usize },
    WrongTrialLength { expected: usize, got: usize },
    InvalidConfig { reason: &'static str },
    /// Mean batch loss became non-finite.
    Diverged { iteration: usize },
    /// A parameter gradient became non-finite.
    NonFiniteGradient {
        tensor: &'static str,
        index: usize,
        iteration: usize,
    },
    Tensor(TensorError),
}

impl From<TensorError> for TrainError {
    fn from(e: TensorError) -> Self {
        TrainError::Tensor(e)
    }
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::TooFewTrials { got } => {
                write!(f, "training needs at least 2 trials, got {got}")
            }
            TrainError::WrongTrialLength { expected, got } => {
                write!(f, "trial has {got} samples, geometry expects {expected}")
            }
            TrainError::InvalidConfig { reason } => write!(f, "invalid config: {reason}"),
            TrainError::Diverged { iteration } => {
                write!(f, "training diverged at iteration {iteration}")
            }
            TrainError::NonFiniteGradient {
                tensor,
                index,
                iteration,
            } => write!(
                f,
                "non-finite gradient in {tensor}[{index}] at iteration {iteration}"
            ),
            TrainError::Tensor(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrainError {}

/// Non-fatal conditions worth surfacing before training.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainWarning {
    /// All trials share one class: every sampled pair is positive and the
    /// margin never engages.
    SingleClass,
}

/// Checks a training set for conditions that train() tolerates but a caller
/// probably wants to know about.
pub fn train_warnings(trials: &[Trial]) -> Vec<TrainWarning> {
    let mut warnings = Vec::new();
    if let Some(first) = trials.first() {
        if trials.iter().all(|t| t.label == first.label) {
            warnings.push(TrainWarning::SingleClass);
        }
    }
    warnings
}

/// Loss and flat parameter gradient of one pair, computed the direct way:
/// two full forward passes, two full backward passes, branch gradients
/// summed. This is the reference the batched engine is tested against, and
/// the workhorse for single-pair experiments.
pub fn pair_grad(
    params: &EncoderParams,
    trial_a: &[f64],
    trial_b: &[f64],
    y: u8,
    margin: f64,
    final_relu: bool,
) -> Result<(f64, Vec<f64>), TrainError> {
    struct Branch {
        cache: super::ConvCache,
        zs: [Vec<f64>; 4],
        embedding: Vec<f64>,
    }

    let forward = |trial: &[f64]| -> Result<Branch, TrainError> {
        let cache = params.conv_forward_cached(trial)?;
        let mut v = cache.flat.clone();
        let mut zs: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for layer in 0..4 {
            let z = dense(&v, params.fc_weights(layer), params.fc_bias(layer))?;
            v = if layer < 3 || final_relu {
                relu_slice(&z)
            } else {
                z.clone()
            };
            zs[layer] = z;
        }
        Ok(Branch {
            cache,
            zs,
            embedding: v,
        })
    };

    let ba = forward(trial_a)?;
    let bb = forward(trial_b)?;
    let loss = contrastive_loss(&ba.embedding, &bb.embedding, y, margin)?;
    let (ga, gb) = contrastive_loss_grad(&ba.embedding, &bb.embedding, y, margin)?;

    let mut grad = vec![0.0; params.layout().total_len()];
    let mut backward = |branch: &Branch, g_embed: &[f64]| -> Result<(), TrainError> {
        let mut up = if final_relu {
            relu_backward_slice(&branch.zs[3], g_embed)?
        } else {
            g_embed.to_vec()
        };
        for layer in (0..4).rev() {
            let x = if layer == 0 {
                &branch.cache.flat
            } else {
                // input of this layer = relu of previous pre-activation
                &relu_slice(&branch.zs[layer - 1])
            };
            let dg = dense_backward(x, params.fc_weights(layer), &up, true)?;
            let wseg = &params.layout().segments()[SEG_FC_W[layer]];
            simd::add_assign(
                &mut grad[wseg.offset..wseg.offset + dg.weights.len()],
                &dg.weights,
            );
            let bseg = &params.layout().segments()[SEG_FC_B[layer]];
            simd::add_assign(&mut grad[bseg.offset..bseg.offset + dg.bias.len()], &dg.bias);
            let gx = dg.input.expect("input gradient requested");
            up = if layer == 0 {
                gx
            } else {
                relu_backward_slice(&branch.zs[layer - 1], &gx)?
            };
        }
        let mut conv = ConvGrads::zeros(params.layout());
        params.conv_backward_cached(&branch.cache, &up, &mut conv)?;
        conv.add_into_flat(params.layout(), &mut grad);
        Ok(())
    };

    backward(&ba, &ga)?;
    backward(&bb, &gb)?;
    Ok((loss, grad))
}

/// Reusable buffers for the batched engine, sized for the largest possible
/// number of distinct trials per batch.
struct Workspace {
    x0: Vec<f64>,
    z: [Vec<f64>; 4],
    a: [Vec<f64>; 3],
    dz: [Vec<f64>; 4],
    da: Vec<f64>,
    dx0: Vec<f64>,
    de: Vec<f64>,
    t_left: Vec<f64>,
    t_right: Vec<f64>,
    grad: Vec<f64>,
    slot_of: Vec<u32>,
    wt: [Vec<f64>; 4],
}

impl Workspace {
    fn new(geom: &EncoderGeometry, n_trials: usize, batch_size: usize) -> Self {
        let rmax = n_trials.min(2 * batch_size);
        let d = geom.fc_dims;
        let layout = super::ParamLayout::for_geometry(geom);
        Self {
            x0: vec![0.0; rmax * d[0]],
            z: [
                vec![0.0; rmax * d[1]],
                vec![0.0; rmax * d[2]],
                vec![0.0; rmax * d[3]],
                vec![0.0; rmax * d[4]],
            ],
            a: [
                vec![0.0; rmax * d[1]],
                vec![0.0; rmax * d[2]],
                vec![0.0; rmax * d[3]],
            ],
            dz: [
                vec![0.0; rmax * d[1]],
                vec![0.0; rmax * d[2]],
                vec![0.0; rmax * d[3]],
                vec![0.0; rmax * d[4]],
            ],
            da: vec![0.0; rmax * d[1]],
            dx0: vec![0.0; rmax * d[0]],
            de: vec![0.0; rmax * EMBED_DIM],
            t_left: vec![0.0; rmax * d[0].max(d[1])],
            t_right: vec![0.0; rmax * d[0].max(d[1])],
            grad: vec![0.0; layout.total_len()],
            slot_of: vec![0; n_trials],
            wt: [Vec::new(), Vec::new(), Vec::new(), Vec::new()],
        }
    }

    fn refresh_weight_transposes(&mut self, params: &EncoderParams) {
        let d = params.geometry().fc_dims;
        for l in 0..4 {
            let (m, n) = (d[l + 1], d[l]);
            if self.wt[l].len() != m * n {
                self.wt[l] = vec![0.0; m * n];
            }
            gemm::transpose(&mut self.wt[l], params.fc_weights(l), m, n);
        }
    }
}

/// Forward the convolutional half of every distinct trial, in slot order.
fn conv_forward_all(
    params: &EncoderParams,
    trials: &[Trial],
    slots: &[usize],
) -> Result<Vec<super::ConvCache>, TrainError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        slots
            .par_iter()
            .map(|&t| params.conv_forward_cached(&trials[t].data))
            .collect::<Result<Vec<_>, _>>()
            .map_err(TrainError::from)
    }
    #[cfg(not(feature = "parallel"))]
    {
        slots
            .iter()
            .map(|&t| params.conv_forward_cached(&trials[t].data))
            .collect::<Result<Vec<_>, _>>()
            .map_err(TrainError::from)
    }
}

/// Backward the convolutional half of each distinct trial, accumulating
/// parameter gradients in fixed chunks of slots so the reduction order is
/// independent of scheduling.
fn conv_backward_all(
    params: &EncoderParams,
    caches: &[super::ConvCache],
    dx0: &[f64],
    n0: usize,
    grad: &mut [f64],
) -> Result<(), TrainError> {
    const CHUNK: usize = 16;
    let layout = params.layout();
    let chunk_grads: Result<Vec<ConvGrads>, TrainError> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            caches
                .par_chunks(CHUNK)
                .enumerate()
                .map(|(ci, chunk)| {
                    let mut acc = ConvGrads::zeros(layout);
                    for (k, cache) in chunk.iter().enumerate() {
                        let row = ci * CHUNK + k;
                        params.conv_backward_cached(cache, &dx0[row * n0..(row + 1) * n0], &mut acc)?;
                    }
                    Ok(acc)
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            caches
                .chunks(CHUNK)
                .enumerate()
                .map(|(ci, chunk)| {
                    let mut acc = ConvGrads::zeros(layout);
                    for (k, cache) in chunk.iter().enumerate() {
                        let row = ci * CHUNK + k;
                        params.conv_backward_cached(cache, &dx0[row * n0..(row + 1) * n0], &mut acc)?;
                    }
                    Ok(acc)
                })
                .collect()
        }
    };
    let chunk_grads = chunk_grads?;
    let mut total = ConvGrads::zeros(layout);
    for cg in &chunk_grads {
        total.add(cg);
    }
    total.add_into_flat(layout, grad);
    Ok(())
}

/// One batch: mean loss into the return value, mean parameter gradient into
/// `ws.grad`.
fn batch_step(
    params: &EncoderParams,
    trials: &[Trial],
    batch: &PairBatch,
    config: &TrainConfig,
    ws: &mut Workspace,
) -> Result<f64, TrainError> {
    let d = params.geometry().fc_dims;
    let layout = params.layout();

    // distinct trials, ascending; slot_of maps trial index -> row
    let mut slots: Vec<usize> = Vec::with_capacity(2 * batch.len());
    for p in &batch.pairs {
        slots.push(p.a);
        slots.push(p.b);
    }
    slots.sort_unstable();
    slots.dedup();
    let r = slots.len();
    for (row, &t) in slots.iter().enumerate() {
        ws.slot_of[t] = row as u32;
    }

    // convolutional forward, X0 = flattened pool3 activations
    let caches = conv_forward_all(params, trials, &slots)?;
    for (row, cache) in caches.iter().enumerate() {
        ws.x0[row * d[0]..(row + 1) * d[0]].copy_from_slice(&cache.flat);
    }

    // dense forward
    for l in 0..4 {
        let (n, m) = (d[l], d[l + 1]);
        let input = if l == 0 { &ws.x0 } else { &ws.a[l - 1] };
        gemm::matmul_nt_par(
            &mut ws.z[l][..r * m],
            &input[..r * n],
            params.fc_weights(l),
            r,
            n,
            m,
        );
        let bias = params.fc_bias(l);
        for row in 0..r {
            simd::add_assign(&mut ws.z[l][row * m..(row + 1) * m], bias);
        }
        if l < 3 {
            for (a, &z) in ws.a[l][..r * m].iter_mut().zip(&ws.z[l][..r * m]) {
                *a = if z > 0.0 { z } else { 0.0 };
            }
        }
    }

    // embeddings: z4, optionally through ReLU
    let m4 = d[4];
    let embed = |zrow: &[f64], out: &mut [f64]| {
        for (o, &z) in out.iter_mut().zip(zrow) {
            *o = if config.final_relu && z <= 0.0 { 0.0 } else { z };
        }
    };

    // pair losses and embedding gradients, accumulated in pair order
    ws.de[..r * m4].fill(0.0);
    let mut loss_sum = 0.0;
    let mut e1 = [0.0; EMBED_DIM];
    let mut e2 = [0.0; EMBED_DIM];
    for p in &batch.pairs {
        let (sa, sb) = (ws.slot_of[p.a] as usize, ws.slot_of[p.b] as usize);
        embed(&ws.z[3][sa * m4..(sa + 1) * m4], &mut e1);
        embed(&ws.z[3][sb * m4..(sb + 1) * m4], &mut e2);
        loss_sum += contrastive_loss(&e1, &e2, p.y, config.margin)?;
        let (g1, g2) = contrastive_loss_grad(&e1, &e2, p.y, config.margin)?;
        simd::add_assign(&mut ws.de[sa * m4..(sa + 1) * m4], &g1);
        simd::add_assign(&mut ws.de[sb * m4..(sb + 1) * m4], &g2);
    }
    let inv_b = 1.0 / batch.len() as f64;
    simd::scale(&mut ws.de[..r * m4], inv_b);
    let mean_loss = loss_sum * inv_b;

    // gradient buffer: dense blocks are overwritten below, conv blocks and
    // biases accumulate, so zero those
    let zero_ranges = [
        super::SEG_CONV1_K,
        super::SEG_CONV1_B,
        super::SEG_CONV2_K,
        super::SEG_CONV2_B,
        super::SEG_CONV3_K,
        super::SEG_CONV3_B,
        SEG_FC_B[0],
        SEG_FC_B[1],
        SEG_FC_B[2],
        SEG_FC_B[3],
    ];
    for idx in zero_ranges {
        let seg = &layout.segments()[idx];
        ws.grad[seg.offset..seg.offset + seg.len()].fill(0.0);
    }

    // dense backward: dz4 = de (through final ReLU when enabled)
    if config.final_relu {
        for i in 0..r * m4 {
            ws.dz[3][i] = if ws.z[3][i] > 0.0 { ws.de[i] } else { 0.0 };
        }
    } else {
        ws.dz[3][..r * m4].copy_from_slice(&ws.de[..r * m4]);
    }

    for l in (0..4).rev() {
        let (n, m) = (d[l], d[l + 1]);
        // bias gradient: column sums in ascending row order
        {
            let seg = &layout.segments()[SEG_FC_B[l]];
            let (off, len) = (seg.offset, seg.len());
            gemm::column_sums(&mut ws.grad[off..off + len], &ws.dz[l][..r * m], r, m);
        }
        // weight gradient: dzᵀ · input, via transposed operands
        {
            let input = if l == 0 { &ws.x0 } else { &ws.a[l - 1] };
            gemm::transpose(&mut ws.t_left[..r * m], &ws.dz[l][..r * m], r, m);
            gemm::transpose(&mut ws.t_right[..r * n], &input[..r * n], r, n);
            let seg = &layout.segments()[SEG_FC_W[l]];
            let (off, len) = (seg.offset, seg.len());
            gemm::matmul_nt_par(
                &mut ws.grad[off..off + len],
                &ws.t_left[..r * m],
                &ws.t_right[..r * n],
                m,
                r,
                n,
            );
        }
        // input gradient against transposed weights
        let out = if l == 0 {
            &mut ws.dx0
        } else {
            &mut ws.da
        };
        gemm::matmul_nt_par(&mut out[..r * n], &ws.dz[l][..r * m], &ws.wt[l], r, m, n);
        if l > 0 {
            for i in 0..r * n {
                ws.dz[l - 1][i] = if ws.z[l - 1][i] > 0.0 { out[i] } else { 0.0 };
            }
        }
    }

    // convolutional backward per distinct trial
    conv_backward_all(params, &caches, &ws.dx0, d[0], &mut ws.grad)?;

    Ok(mean_loss)
}

/// Trains the encoder on `trials`, returning the final parameters and the
/// per-iteration mean loss. Bit-reproducible for a fixed config.
pub fn train(
    trials: &[Trial],
    geom: &EncoderGeometry,
    config: &TrainConfig,
) -> Result<(EncoderParams, Vec<f64>), TrainError> {
    config.validate()?;
    if trials.len() < 2 {
        return Err(TrainError::TooFewTrials { got: trials.len() });
    }
    let expected = geom.trial_len();
    for t in trials {
        if t.data.len() != expected {
            return Err(TrainError::WrongTrialLength {
                expected,
                got: t.data.len(),
            });
        }
    }

    let mut params = EncoderParams::init_he(geom.clone(), config.rng_seed);
    let mut adam = AdamState::new(params.layout().total_len());
    let hyper = config.adam();
    let labels: Vec<u8> = trials.iter().map(|t| t.label).collect();
    let mut pair_rng = SeedStream::new(config.rng_seed).derive(1);
    let mut ws = Workspace::new(geom, trials.len(), config.batch_size);
    let mut history = Vec::with_capacity(config.iterations);

    ws.refresh_weight_transposes(&params);
    for iteration in 0..config.iterations {
        let batch = sample_pairs(&labels, config.batch_size, &mut pair_rng)?;
        let loss = batch_step(&params, trials, &batch, config, &mut ws)?;
        if !loss.is_finite() {
            return Err(TrainError::Diverged { iteration });
        }
        adam_step(params.data_mut(), &ws.grad, &mut adam, &hyper).map_err(|e| {
            let (tensor, index) = params.layout().locate(e.index);
            TrainError::NonFiniteGradient {
                tensor,
                index,
                iteration,
            }
        })?;
        ws.refresh_weight_transposes(&params);
        history.push(loss);
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Trial;

    fn tiny_geom() -> EncoderGeometry {
        EncoderGeometry::for_input(6, 32).unwrap()
    }

    fn synth_trials(geom: &EncoderGeometry, n: usize, classes: usize) -> Vec<Trial> {
        let mut rng = SeedStream::new(1234);
        (0..n)
            .map(|i| {
                let label = (i % classes) as u8;
                let freq = 0.05 + 0.11 * label as f64;
                let data: Vec<f64> = (0..geom.trial_len())
                    .map(|j| crate::math::sin(freq * j as f64) + 0.01 * rng.normal())
                    .collect();
                Trial { label, data }
            })
            .collect()
    }

    #[test]
    fn zero_iterations_returns_initial_params() {
        let geom = tiny_geom();
        let trials = synth_trials(&geom, 6, 3);
        let config = TrainConfig {
            iterations: 0,
            batch_size: 4,
            rng_seed: 5,
            ..TrainConfig::default()
        };
        let (params, history) = train(&trials, &geom, &config).unwrap();
        assert!(history.is_empty());
        assert_eq!(params.data(), EncoderParams::init_he(geom, 5).data());
    }

    #[test]
    fn fixed_seed_reproduces_loss_history_bitwise() {
        let geom = tiny_geom();
        let trials = synth_trials(&geom, 8, 2);
        let config = TrainConfig {
            iterations: 4,
            batch_size: 12,
            rng_seed: 77,
            ..TrainConfig::default()
        };
        let (p1, h1) = train(&trials, &geom, &config).unwrap();
        let (p2, h2) = train(&trials, &geom, &config).unwrap();
        assert_eq!(p1.data(), p2.data());
        let bits1: Vec<u64> = h1.iter().map(|l| l.to_bits()).collect();
        let bits2: Vec<u64> = h2.iter().map(|l| l.to_bits()).collect();
        assert_eq!(bits1, bits2);
    }

    #[test]
    fn batched_gradient_matches_pair_sum() {
        let geom = tiny_geom();
        let trials = synth_trials(&geom, 7, 3);
        let config = TrainConfig {
            batch_size: 9,
            rng_seed: 3,
            ..TrainConfig::default()
        };
        let params = EncoderParams::init_he(geom.clone(), 3);
        let labels: Vec<u8> = trials.iter().map(|t| t.label).collect();
        let mut rng = SeedStream::new(3).derive(1);
        let batch = sample_pairs(&labels, config.batch_size, &mut rng).unwrap();

        let mut ws = Workspace::new(&geom, trials.len(), config.batch_size);
        ws.refresh_weight_transposes(&params);
        let batched_loss = batch_step(&params, &trials, &batch, &config, &mut ws).unwrap();

        let mut naive = vec![0.0; params.layout().total_len()];
        let mut naive_loss = 0.0;
        for p in &batch.pairs {
            let (l, g) = pair_grad(
                &params,
                &trials[p.a].data,
                &trials[p.b].data,
                p.y,
                config.margin,
                config.final_relu,
            )
            .unwrap();
            naive_loss += l;
            simd::add_assign(&mut naive, &g);
        }
        naive_loss /= batch.len() as f64;
        simd::scale(&mut naive, 1.0 / batch.len() as f64);

        assert!(
            (batched_loss - naive_loss).abs() <= 1e-12 * naive_loss.abs().max(1.0),
            "loss mismatch: {batched_loss} vs {naive_loss}"
        );
        for (i, (a, b)) in ws.grad.iter().zip(&naive).enumerate() {
            let tol = 1e-9 * a.abs().max(b.abs()).max(1e-3);
            assert!(
                (a - b).abs() <= tol,
                "grad[{i}] {} vs {} ({})",
                a,
                b,
                params.layout().locate(i).0
            );
        }
    }

    #[test]
    fn training_reduces_loss_on_separable_classes() {
        let geom = tiny_geom();
        let trials = synth_trials(&geom, 12, 2);
        let config = TrainConfig {
            iterations: 60,
            batch_size: 24,
            learning_rate: 3e-4,
            rng_seed: 9,
            ..TrainConfig::default()
        };
        let (_, history) = train(&trials, &geom, &config).unwrap();
        let head: f64 = history[..5].iter().sum::<f64>() / 5.0;
        let tail: f64 = history[history.len() - 5..].iter().sum::<f64>() / 5.0;
        assert!(
            tail < 0.5 * head,
            "loss did not drop: head {head}, tail {tail}"
        );
    }

    #[test]
    fn single_class_warns_but_trains() {
        let geom = tiny_geom();
        let trials = synth_trials(&geom, 6, 1);
        assert_eq!(train_warnings(&trials), vec![TrainWarning::SingleClass]);
        let config = TrainConfig {
            iterations: 2,
            batch_size: 6,
            ..TrainConfig::default()
        };
        assert!(train(&trials, &geom, &config).is_ok());
    }

    #[test]
    fn too_few_trials_rejected() {
        let geom = tiny_geom();
        let trials = synth_trials(&geom, 1, 1);
        assert!(matches!(
            train(&trials, &geom, &TrainConfig::default()),
            Err(TrainError::TooFewTrials { got: 1 })
        ));
    }
}
