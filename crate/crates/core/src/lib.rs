//! Latent-space semantic inpainting with a frozen DCGAN-style generator.
//!
//! Everything in this crate is pure computation over `alloc` containers:
//! the network engine, the inpainting objectives and optimizers, learned
//! latent initializers (single frame and recurrent window), corruption masks,
//! the toy face synthesizer, and the evaluation metrics. File formats, the
//! dataset layer and the command-line harness live in the `inpaint-lab`
//! companion crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is the NaN-rejecting form used by every validator, and index
// loops read better than zipped iterators in the numeric kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod embedder;
pub mod error;
pub mod image;
pub mod initializer;
pub mod inpaint;
pub mod mask;
pub mod math;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod pseudo;
pub mod rng;
pub mod seqinit;
pub mod sequence;
pub mod stats;
pub mod toyface;

pub use error::{Error, Result};
pub use image::{Image, LatentVector};
pub use mask::{CorruptionSpec, Mask, MaskKind};
