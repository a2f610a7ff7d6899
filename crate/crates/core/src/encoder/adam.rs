//! ADAM optimizer over a flat parameter buffer.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// ADAM hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

/// First/second moment accumulators aligned with a flat parameter buffer.
///
/// The running β^t powers are carried explicitly so the bias correction is a
/// pinned multiplication chain rather than a pow call.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1_pow: f64,
    beta2_pow: f64,
}

/// A non-finite gradient entry, by flat parameter index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonFiniteGrad {
    pub index: usize,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// Rebuild a state snapshot (checkpoint restore).
    pub fn from_parts(m: Vec<f64>, v: Vec<f64>, t: u64, beta1: f64, beta2: f64) -> Self {
        let mut beta1_pow = 1.0;
        let mut beta2_pow = 1.0;
        for _ in 0..t {
            beta1_pow *= beta1;
            beta2_pow *= beta2;
        }
        Self {
            m,
            v,
            t,
            beta1_pow,
            beta2_pow,
        }
    }
}

/// One bias-corrected ADAM update, in place:
/// m ← β₁m + (1−β₁)g, v ← β₂v + (1−β₂)g², θ ← θ − lr·m̂/(√v̂ + ε).
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    hyper: &AdamHyper,
) -> Result<(), NonFiniteGrad> {
    assert_eq!(params.len(), grads.len(), "adam: gradient shape mismatch");
    assert_eq!(params.len(), state.m.len(), "adam: state shape mismatch");

    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(NonFiniteGrad { index });
    }

    state.t += 1;
    state.beta1_pow *= hyper.beta1;
    state.beta2_pow *= hyper.beta2;
    let m_corr = 1.0 / (1.0 - state.beta1_pow);
    let v_corr = 1.0 / (1.0 - state.beta2_pow);

    let (b1, b2) = (hyper.beta1, hyper.beta2);
    for i in 0..params.len() {
        let g = grads[i];
        let m = b1 * state.m[i] + (1.0 - b1) * g;
        let v = b2 * state.v[i] + (1.0 - b2) * (g * g);
        state.m[i] = m;
        state.v[i] = v;
        params[i] -= hyper.learning_rate * (m * m_corr) / (math::sqrt(v * v_corr) + hyper.epsilon);
    }
    Ok(())
}
