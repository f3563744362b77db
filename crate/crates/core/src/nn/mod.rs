//! Minimal f64 network engine: layer stacks, an LSTM cell, optimizers and a
//! weight codec.

pub mod codec;
pub mod gemm;
pub mod layers;
pub mod lstm;
pub mod optim;

pub use layers::{Batch, Layer, Mode, Sequential, SequentialBuilder, Shape, Tape};
pub use optim::{Adam, AdamConfig, SgdMomentum};
