//! Deep-metric-learning toolkit for multichannel time-series trials.
//!
//! The crate trains a weight-shared Siamese convolutional encoder with
//! contrastive loss on raw 6-channel trials, classifies by k-nearest-neighbor
//! in the learned 8-dimensional embedding space, and evaluates with stratified
//! cross-validation and significance statistics.
//!
//! Everything here is deterministic: for a fixed seed and configuration, the
//! trained parameters, embeddings, and reports are bit-identical across runs
//! and across the scalar/AVX kernel paths.
//!
//! The crate is `no_std`-compatible (`alloc` required); file formats and the
//! command-line front end live in the companion `smne-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod data;
pub mod encoder;
pub mod eval;
pub mod knn;
pub mod rng;
pub mod simd;
pub mod tensor;

pub use data::{Trial, TrialSet};
pub use encoder::{AdamState, EncoderGeometry, EncoderParams, TrainConfig};
pub use tensor::Tensor3;

pub(crate) mod math {
    //! Thin wrappers selecting bit-identical math routines for std and
    //! no_std builds. sqrt and fused multiply-add are correctly rounded by
    //! IEEE 754, so the two paths cannot diverge; the transcendentals always
    //! go through libm so that builds agree bitwise.

    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        #[cfg(feature = "std")]
        {
            x.sqrt()
        }
        #[cfg(not(feature = "std"))]
        {
            libm::sqrt(x)
        }
    }

    #[inline(always)]
    pub fn fma(a: f64, b: f64, c: f64) -> f64 {
        #[cfg(feature = "std")]
        {
            a.mul_add(b, c)
        }
        #[cfg(not(feature = "std"))]
        {
            libm::fma(a, b, c)
        }
    }

    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }

    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[inline(always)]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }

    #[inline(always)]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }

    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }

    #[inline(always)]
    pub fn ln_gamma(x: f64) -> f64 {
        libm::lgamma(x)
    }
}
