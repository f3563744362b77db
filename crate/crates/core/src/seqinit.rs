//! Recurrent window initializer: a shared frame encoder feeds an LSTM whose
//! hidden states are mapped to one latent per frame.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{bail, Error, Result};
use crate::image::{Image, LatentVector};
use crate::initializer::{encoder_network, random_damage, reconstruct, InitStepRecord, InitTrainConfig, InitializerCheckpoint};
use crate::model::{check_dataset, images_to_batch, Architecture, ModelCheckpoint, Network};
use crate::nn::lstm::{Lstm, RecurrentState};
use crate::nn::{Adam, AdamConfig, Batch, Mode, Sequential, SequentialBuilder, Shape};
use crate::rng;

pub const DEFAULT_HIDDEN: usize = 256;
pub const DEFAULT_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeqInitTrainConfig {
    pub base: InitTrainConfig,
    pub window: usize,
    pub h_dim: usize,
    /// Adds the perceptual term weighted by `base.lambda`.
    pub perceptual: bool,
}

impl Default for SeqInitTrainConfig {
    fn default() -> Self {
        Self {
            base: InitTrainConfig::default(),
            window: DEFAULT_WINDOW,
            h_dim: DEFAULT_HIDDEN,
            perceptual: false,
        }
    }
}

impl SeqInitTrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.window < 2 {
            bail!(Config, "window must be at least 2");
        }
        if self.h_dim == 0 {
            bail!(Config, "h_dim must be positive");
        }
        Ok(())
    }
}

fn head_network(h_dim: usize, latent_dim: usize) -> Sequential {
    SequentialBuilder::new(Shape::vector(h_dim)).linear(latent_dim).tanh().build()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInitCheckpoint {
    pub arch: Architecture,
    pub window: usize,
    pub h_dim: usize,
    pub encoder: Network,
    pub lstm_params: Vec<f64>,
    pub head: Network,
    pub step: usize,
    pub history: Vec<InitStepRecord>,
}

impl SequenceInitCheckpoint {
    pub fn init(arch: Architecture, window: usize, h_dim: usize, seed: u64) -> Result<Self> {
        arch.validate()?;
        if window < 2 || h_dim == 0 {
            bail!(Config, "window must be at least 2 and h_dim positive");
        }
        let mut r = rng::child(seed, 20);
        let encoder = Network::init(encoder_network(&arch), &mut r);
        let lstm = Lstm::new(arch.latent_dim, h_dim, 0);
        let mut lstm_params = vec![0.0; lstm.param_len()];
        lstm.init(&mut lstm_params, &mut r);
        let head = Network::init(head_network(h_dim, arch.latent_dim), &mut r);
        Ok(Self {
            arch,
            window,
            h_dim,
            encoder,
            lstm_params,
            head,
            step: 0,
            history: Vec::new(),
        })
    }

    /// Copies a trained single-frame encoder into the frame descriptor.
    pub fn warm_start(&mut self, init: &InitializerCheckpoint) -> Result<()> {
        if init.arch != self.arch {
            bail!(Dimension, "initializer architecture differs from the sequence model");
        }
        self.encoder.params.clone_from(&init.encoder.params);
        Ok(())
    }

    pub fn lstm(&self) -> Lstm {
        Lstm::new(self.arch.latent_dim, self.h_dim, 0)
    }

    pub fn latent_dim(&self) -> usize {
        self.arch.latent_dim
    }

    pub fn encoder_bytes(&self) -> Vec<u8> {
        self.encoder.to_bytes("encoder")
    }

    pub fn lstm_bytes(&self) -> Vec<u8> {
        crate::nn::codec::encode(&[crate::nn::codec::NamedTensor::new("lstm.params", self.lstm_params.clone())])
    }

    pub fn head_bytes(&self) -> Vec<u8> {
        self.head.to_bytes("head")
    }

    pub fn from_parts(
        arch: Architecture,
        window: usize,
        h_dim: usize,
        parts: [&[u8]; 3],
        step: usize,
        history: Vec<InitStepRecord>,
    ) -> Result<Self> {
        arch.validate().map_err(|e| Error::Load(format!("{e}")))?;
        if window < 2 || h_dim == 0 {
            bail!(Load, "window {window} or h_dim {h_dim} invalid");
        }
        let lstm = Lstm::new(arch.latent_dim, h_dim, 0);
        let mut tensors = crate::nn::codec::decode(parts[1])?;
        let lstm_params = crate::nn::codec::take_tensor(&mut tensors, "lstm.params", lstm.param_len())?;
        if let Some(extra) = tensors.first() {
            bail!(Load, "unexpected tensor {}", extra.name);
        }
        Ok(Self {
            arch,
            window,
            h_dim,
            encoder: Network::from_bytes(encoder_network(&arch), parts[0], "encoder")?,
            lstm_params,
            head: Network::from_bytes(head_network(h_dim, arch.latent_dim), parts[2], "head")?,
            step,
            history,
        })
    }

    /// Per-frame descriptors before the recurrence.
    pub fn encode(&self, frames: &[Image]) -> Result<Vec<LatentVector>> {
        self.check_frames(frames, frames.len())?;
        let out = self.encoder.infer(&images_to_batch(frames, self.arch.image_shape()));
        Ok(out.data.chunks(self.arch.latent_dim).map(|c| LatentVector(c.to_vec())).collect())
    }

    fn check_frames(&self, frames: &[Image], expected: usize) -> Result<()> {
        if frames.len() != expected {
            bail!(Dimension, "{} frames for a window of {expected}", frames.len());
        }
        let r = self.arch.resolution;
        if let Some(bad) = frames.iter().find(|f| f.dims() != (r, r)) {
            bail!(Dimension, "frame {}x{} for a {r}x{r} model", bad.height(), bad.width());
        }
        Ok(())
    }
}

/// Forward pass over `n` windows laid out window-major in `frames`.
struct Pass {
    enc_tape: crate::nn::Tape,
    lstm_tape: crate::nn::lstm::LstmTape,
    head_tape: crate::nn::Tape,
    /// Latents in window-major order.
    z: Batch,
}

fn run(ckpt: &SequenceInitCheckpoint, frames: &[Image], n: usize) -> Pass {
    let (w, d, h) = (ckpt.window, ckpt.arch.latent_dim, ckpt.h_dim);
    let (enc, enc_tape) = ckpt.encoder.forward(&images_to_batch(frames, ckpt.arch.image_shape()), Mode::Train);
    let xs: Vec<Vec<f64>> = (0..w)
        .map(|t| (0..n).flat_map(|b| enc.sample(b * w + t).iter().copied()).collect())
        .collect();
    let (outs, _, lstm_tape) = ckpt.lstm().forward(&ckpt.lstm_params, &xs, n, RecurrentState::zeros(n, h));
    let mut hidden = vec![0.0; n * w * h];
    for (t, o) in outs.iter().enumerate() {
        for b in 0..n {
            hidden[(b * w + t) * h..(b * w + t + 1) * h].copy_from_slice(&o[b * h..(b + 1) * h]);
        }
    }
    let (z, head_tape) = ckpt.head.forward(&Batch::new(n * w, Shape::vector(h), hidden), Mode::Train);
    debug_assert_eq!(z.shape, Shape::vector(d));
    Pass {
        enc_tape,
        lstm_tape,
        head_tape,
        z,
    }
}

/// Latent initializations for one window, threading the state left to right
/// from zero.
pub fn predict_latent_sequence(frames: &[Image], ckpt: &SequenceInitCheckpoint) -> Result<Vec<LatentVector>> {
    ckpt.check_frames(frames, ckpt.window)?;
    let pass = run(ckpt, frames, 1);
    Ok(pass.z.data.chunks(ckpt.arch.latent_dim).map(|c| LatentVector(c.to_vec())).collect())
}

struct Grads {
    encoder: Vec<f64>,
    lstm: Vec<f64>,
    head: Vec<f64>,
}

fn window_loss(
    ckpt: &SequenceInitCheckpoint,
    gan: &ModelCheckpoint,
    clean: &[Image],
    damaged: &[Image],
    lambda: f64,
    grads: Option<&mut Grads>,
) -> InitStepRecord {
    let w = ckpt.window;
    let n = damaged.len() / w;
    let pass = run(ckpt, damaged, n);
    let rec = reconstruct(gan, &pass.z, clean, lambda);
    if let Some(g) = grads {
        let dh = ckpt
            .head
            .backward(&pass.head_tape, Batch::new(n * w, pass.z.shape, rec.dz), Some(&mut g.head));
        let dhs: Vec<Vec<f64>> = (0..w)
            .map(|t| (0..n).flat_map(|b| dh.sample(b * w + t).iter().copied()).collect())
            .collect();
        let dxs = ckpt.lstm().backward(&ckpt.lstm_params, &pass.lstm_tape, &dhs, Some(&mut g.lstm));
        let d = ckpt.arch.latent_dim;
        let mut denc = vec![0.0; n * w * d];
        for (t, dx) in dxs.iter().enumerate() {
            for b in 0..n {
                denc[(b * w + t) * d..(b * w + t + 1) * d].copy_from_slice(&dx[b * d..(b + 1) * d]);
            }
        }
        ckpt.encoder
            .backward(&pass.enc_tape, Batch::new(n * w, Shape::vector(d), denc), Some(&mut g.encoder));
    }
    InitStepRecord {
        step: 0,
        loss: rec.mse + lambda * rec.perceptual,
        mse: rec.mse,
        perceptual: rec.perceptual,
    }
}

pub fn train_sequence_initializer(
    windows: &[Vec<Image>],
    gan: &ModelCheckpoint,
    config: &SeqInitTrainConfig,
    warm_start: Option<&InitializerCheckpoint>,
) -> Result<SequenceInitCheckpoint> {
    train_sequence_initializer_with(windows, gan, config, warm_start, |_| {})
}

/// Trains on clean windows of `config.window` frames; every frame gets its
/// own freshly drawn mask each step. The generator stays read-only.
pub fn train_sequence_initializer_with(
    windows: &[Vec<Image>],
    gan: &ModelCheckpoint,
    config: &SeqInitTrainConfig,
    warm_start: Option<&InitializerCheckpoint>,
    mut observe: impl FnMut(&InitStepRecord),
) -> Result<SequenceInitCheckpoint> {
    config.validate()?;
    if windows.is_empty() {
        bail!(Data, "no training windows");
    }
    if let Some(bad) = windows.iter().position(|w| w.len() != config.window) {
        bail!(Data, "window {bad} has {} frames, expected {}", windows[bad].len(), config.window);
    }
    for w in windows {
        check_dataset(w, gan.arch.resolution)?;
    }
    let width = config.base.width.or(warm_start.map(|p| p.arch.base_width));
    let arch = Architecture {
        base_width: width.unwrap_or(gan.arch.base_width),
        ..gan.arch
    };
    let mut ckpt = SequenceInitCheckpoint::init(arch, config.window, config.h_dim, config.base.seed)?;
    if let Some(p) = warm_start {
        ckpt.warm_start(p)?;
    }
    let lambda = if config.perceptual { config.base.lambda } else { 0.0 };
    let mut r = rng::child(config.base.seed, 21);
    let cfg = AdamConfig::new(config.base.learning_rate);
    let mut opt_e = Adam::new(cfg, ckpt.encoder.params.len());
    let mut opt_l = Adam::new(cfg, ckpt.lstm_params.len());
    let mut opt_h = Adam::new(cfg, ckpt.head.params.len());
    for step in 0..config.base.steps {
        let mut clean = Vec::new();
        let mut damaged = Vec::new();
        for _ in 0..config.base.batch_size {
            for frame in &windows[r.random_range(0..windows.len())] {
                damaged.push(random_damage(frame, &config.base.mask_kinds, &mut r)?);
                clean.push(frame.clone());
            }
        }
        let mut g = Grads {
            encoder: vec![0.0; ckpt.encoder.params.len()],
            lstm: vec![0.0; ckpt.lstm_params.len()],
            head: vec![0.0; ckpt.head.params.len()],
        };
        let mut rec = window_loss(&ckpt, gan, &clean, &damaged, lambda, Some(&mut g));
        rec.step = step;
        let finite = g.encoder.iter().chain(&g.lstm).chain(&g.head).all(|v| v.is_finite());
        if !rec.loss.is_finite() || !finite {
            return Err(Error::Training {
                step,
                what: format!("sequence initializer loss {}", rec.loss),
            });
        }
        opt_e.step(&mut ckpt.encoder.params, &g.encoder);
        opt_l.step(&mut ckpt.lstm_params, &g.lstm);
        opt_h.step(&mut ckpt.head.params, &g.head);
        observe(&rec);
        ckpt.history.push(rec);
        ckpt.step = step + 1;
    }
    Ok(ckpt)
}
