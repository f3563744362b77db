//! Feed-forward latent initializer: an encoder from a damaged image to a
//! latent vector, trained through the frozen generator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{bail, Error, Result};
use crate::image::{Image, LatentVector};
use crate::inpaint::perceptual_from_logit;
use crate::mask::{apply_mask, make_mask, CorruptionSpec, MaskKind};
use crate::model::{check_dataset, images_to_batch, Architecture, ModelCheckpoint, Network};
use crate::nn::{Adam, AdamConfig, Batch, Mode, Sequential, Shape};
use crate::rng;

/// Discriminator-shaped trunk with an independent weight set and a
/// `latent_dim` tanh head.
pub fn encoder_network(arch: &Architecture) -> Sequential {
    arch.conv_trunk().linear(arch.latent_dim).tanh().build()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitTrainConfig {
    /// Weight of the perceptual term.
    pub lambda: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub mask_kinds: Vec<MaskKind>,
    /// Encoder base width; `None` reuses the GAN's.
    pub width: Option<usize>,
}

impl Default for InitTrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            batch_size: 32,
            steps: 3000,
            learning_rate: 1e-3,
            seed: 0,
            mask_kinds: MaskKind::ALL.to_vec(),
            width: None,
        }
    }
}

impl InitTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            bail!(Config, "batch_size must be positive");
        }
        if !(self.learning_rate > 0.0) {
            bail!(Config, "learning_rate must be positive");
        }
        if !(self.lambda >= 0.0) {
            bail!(Config, "lambda must be non-negative");
        }
        if self.mask_kinds.is_empty() {
            bail!(Config, "mask_kinds must not be empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitStepRecord {
    pub step: usize,
    pub loss: f64,
    pub mse: f64,
    pub perceptual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitializerCheckpoint {
    pub arch: Architecture,
    pub encoder: Network,
    pub step: usize,
    pub history: Vec<InitStepRecord>,
}

impl InitializerCheckpoint {
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        Ok(Self {
            arch,
            encoder: Network::init(encoder_network(&arch), &mut rng::child(seed, 10)),
            step: 0,
            history: Vec::new(),
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.arch.latent_dim
    }

    pub fn resolution(&self) -> usize {
        self.arch.resolution
    }

    pub fn weight_bytes(&self) -> Vec<u8> {
        self.encoder.to_bytes("encoder")
    }

    pub fn from_parts(arch: Architecture, bytes: &[u8], step: usize, history: Vec<InitStepRecord>) -> Result<Self> {
        arch.validate().map_err(|e| Error::Load(format!("{e}")))?;
        Ok(Self {
            arch,
            encoder: Network::from_bytes(encoder_network(&arch), bytes, "encoder")?,
            step,
            history,
        })
    }

    /// Fails unless this initializer was built for `gan`'s latent space.
    pub fn ensure_pairs_with(&self, gan: &ModelCheckpoint) -> Result<()> {
        if self.arch.latent_dim != gan.arch.latent_dim || self.arch.resolution != gan.arch.resolution {
            bail!(
                Dimension,
                "initializer (d={}, {}px) does not pair with model (d={}, {}px)",
                self.arch.latent_dim,
                self.arch.resolution,
                gan.arch.latent_dim,
                gan.arch.resolution
            );
        }
        Ok(())
    }
}

fn check_resolution(image: &Image, resolution: usize) -> Result<()> {
    if image.dims() != (resolution, resolution) {
        bail!(
            Dimension,
            "image {}x{} for a {resolution}x{resolution} initializer",
            image.height(),
            image.width()
        );
    }
    Ok(())
}

pub fn predict_latent(damaged: &Image, ckpt: &InitializerCheckpoint) -> Result<LatentVector> {
    Ok(predict_latents(core::slice::from_ref(damaged), ckpt)?.remove(0))
}

pub fn predict_latents(damaged: &[Image], ckpt: &InitializerCheckpoint) -> Result<Vec<LatentVector>> {
    for im in damaged {
        check_resolution(im, ckpt.arch.resolution)?;
    }
    let out = ckpt.encoder.infer(&images_to_batch(damaged, ckpt.arch.image_shape()));
    Ok(out.data.chunks(ckpt.arch.latent_dim).map(|c| LatentVector(c.to_vec())).collect())
}

/// Reconstruction objective through the frozen generator:
/// per-pixel mean squared error to `clean` plus `lambda` times the mean
/// perceptual term.
#[derive(Debug, Clone)]
pub(crate) struct Reconstruction {
    pub mse: f64,
    pub perceptual: f64,
    /// Gradient with respect to the latent batch.
    pub dz: Vec<f64>,
}

pub(crate) fn reconstruct(gan: &ModelCheckpoint, z: &Batch, clean: &[Image], lambda: f64) -> Reconstruction {
    let shape = gan.arch.image_shape();
    let n = z.n;
    let (x, g_tape) = gan.generator.forward(z, Mode::Eval);
    let target = images_to_batch(clean, shape);
    let count = (n * shape.len()) as f64;
    let mut mse = 0.0;
    let mut dx: Vec<f64> = x
        .data
        .iter()
        .zip(&target.data)
        .map(|(a, b)| {
            let r = a - b;
            mse += r * r / count;
            2.0 * r / count
        })
        .collect();
    let mut perceptual = 0.0;
    if lambda != 0.0 {
        let (logits, d_tape) = gan.discriminator.forward(&x, Mode::Eval);
        let dl: Vec<f64> = logits
            .data
            .iter()
            .map(|&l| {
                let (v, dv) = perceptual_from_logit(l);
                perceptual += v / n as f64;
                lambda * dv / n as f64
            })
            .collect();
        let back = gan.discriminator.backward(&d_tape, Batch::new(n, Shape::vector(1), dl), None);
        for (a, b) in dx.iter_mut().zip(&back.data) {
            *a += b;
        }
    }
    let dz = gan.generator.backward(&g_tape, Batch::new(n, shape, core::mem::take(&mut dx)), None);
    Reconstruction {
        mse,
        perceptual,
        dz: dz.data,
    }
}

/// Damages `clean` with a mask of a kind drawn from `kinds`.
pub(crate) fn random_damage<R: Rng + ?Sized>(clean: &Image, kinds: &[MaskKind], rng: &mut R) -> Result<Image> {
    let kind = kinds[rng.random_range(0..kinds.len())];
    let mask = make_mask(&CorruptionSpec::new(kind, rng.random()), clean.dims())?;
    apply_mask(clean, &mask)
}

/// Loss of the encoder on one batch; accumulates parameter gradients into
/// `grads` when given.
pub(crate) fn encoder_loss(
    encoder: &Network,
    gan: &ModelCheckpoint,
    clean: &[Image],
    damaged: &[Image],
    lambda: f64,
    grads: Option<&mut [f64]>,
) -> InitStepRecord {
    let shape = gan.arch.image_shape();
    let (z, tape) = encoder.forward(&images_to_batch(damaged, shape), Mode::Train);
    let rec = reconstruct(gan, &z, clean, lambda);
    if let Some(g) = grads {
        encoder.backward(&tape, Batch::new(z.n, z.shape, rec.dz), Some(g));
    }
    InitStepRecord {
        step: 0,
        loss: rec.mse + lambda * rec.perceptual,
        mse: rec.mse,
        perceptual: rec.perceptual,
    }
}

pub fn train_initializer(
    images: &[Image],
    gan: &ModelCheckpoint,
    config: &InitTrainConfig,
) -> Result<InitializerCheckpoint> {
    train_initializer_with(images, gan, config, |_| {})
}

/// Trains the encoder with clean images damaged on the fly; the generator
/// and discriminator are read-only throughout.
pub fn train_initializer_with(
    images: &[Image],
    gan: &ModelCheckpoint,
    config: &InitTrainConfig,
    mut observe: impl FnMut(&InitStepRecord),
) -> Result<InitializerCheckpoint> {
    config.validate()?;
    check_dataset(images, gan.arch.resolution)?;
    let arch = Architecture {
        base_width: config.width.unwrap_or(gan.arch.base_width),
        ..gan.arch
    };
    let mut ckpt = InitializerCheckpoint::init(arch, config.seed)?;
    let mut r = rng::child(config.seed, 11);
    let mut opt = Adam::new(AdamConfig::new(config.learning_rate), ckpt.encoder.params.len());
    for step in 0..config.steps {
        let mut clean = Vec::with_capacity(config.batch_size);
        let mut damaged = Vec::with_capacity(config.batch_size);
        for _ in 0..config.batch_size {
            let im = &images[r.random_range(0..images.len())];
            damaged.push(random_damage(im, &config.mask_kinds, &mut r)?);
            clean.push(im.clone());
        }
        let mut grads = vec![0.0; ckpt.encoder.params.len()];
        let mut rec = encoder_loss(&ckpt.encoder, gan, &clean, &damaged, config.lambda, Some(&mut grads));
        rec.step = step;
        if !rec.loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Training {
                step,
                what: format!("initializer loss {}", rec.loss),
            });
        }
        opt.step(&mut ckpt.encoder.params, &grads);
        observe(&rec);
        ckpt.history.push(rec);
        ckpt.step = step + 1;
    }
    Ok(ckpt)
}

/// Mean per-pixel squared error of generator outputs against `clean`.
pub fn reconstruction_mse(gan: &ModelCheckpoint, zs: &[LatentVector], clean: &[Image]) -> Result<f64> {
    let gen = gan.generate(zs)?;
    if gen.len() != clean.len() {
        bail!(Arity, "{} latents for {} images", zs.len(), clean.len());
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (g, c) in gen.iter().zip(clean) {
        g.ensure_same_shape(c)?;
        for (a, b) in g.planar().iter().zip(c.planar()) {
            sum += (a - b) * (a - b);
        }
        count += c.planar().len();
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toyface;

    fn gan() -> ModelCheckpoint {
        let mut g = ModelCheckpoint::init(Architecture::new(8, 16, 2).unwrap(), 3).unwrap();
        crate::model::jitter(&mut g.generator, 1, 0.2);
        crate::model::jitter(&mut g.discriminator, 2, 0.2);
        g
    }

    fn faces(n: usize) -> Vec<Image> {
        toyface::synthesize(n, 16, n.min(4), 1).unwrap().images
    }

    #[test]
    fn predictions_are_deterministic_and_bounded() {
        let ckpt = InitializerCheckpoint::init(Architecture::new(8, 16, 2).unwrap(), 1).unwrap();
        let im = &faces(1)[0];
        let a = predict_latent(im, &ckpt).unwrap();
        assert_eq!(a, predict_latent(im, &ckpt).unwrap());
        assert_eq!(a.dim(), 8);
        assert!(a.iter().all(|v| v.abs() < 1.0));
        assert!(matches!(predict_latent(&Image::filled(32, 32, 0.0), &ckpt), Err(Error::Dimension(_))));
    }

    #[test]
    fn zero_steps_keeps_fresh_weights() {
        let g = gan();
        let cfg = InitTrainConfig {
            steps: 0,
            seed: 4,
            ..InitTrainConfig::default()
        };
        let trained = train_initializer(&faces(4), &g, &cfg).unwrap();
        let fresh = InitializerCheckpoint::init(g.arch, 4).unwrap();
        let im = &faces(2)[1];
        assert_eq!(predict_latent(im, &trained).unwrap(), predict_latent(im, &fresh).unwrap());
    }

    #[test]
    fn gan_stays_frozen_and_step_zero_is_seeded() {
        let g = gan();
        let before = g.clone();
        let cfg = InitTrainConfig {
            steps: 3,
            batch_size: 4,
            seed: 9,
            ..InitTrainConfig::default()
        };
        let data = faces(8);
        let a = train_initializer(&data, &g, &cfg).unwrap();
        let b = train_initializer(&data, &g, &cfg).unwrap();
        assert_eq!(g, before);
        assert_eq!(a.history[0].loss, b.history[0].loss);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_lambda_is_pure_mse() {
        let g = gan();
        let data = faces(4);
        let enc = InitializerCheckpoint::init(g.arch, 2).unwrap().encoder;
        let rec = encoder_loss(&enc, &g, &data, &data, 0.0, None);
        assert_eq!(rec.loss, rec.mse);
        let zs = predict_latents(&data, &InitializerCheckpoint::init(g.arch, 2).unwrap()).unwrap();
        assert!((rec.mse - reconstruction_mse(&g, &zs, &data).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn loss_gradient_matches_finite_differences_on_probe_weights() {
        let g = gan();
        let data = faces(3);
        let mut r = rng::seeded(5);
        let damaged: Vec<Image> = data
            .iter()
            .map(|im| random_damage(im, &MaskKind::ALL, &mut r).unwrap())
            .collect();
        let mut enc = InitializerCheckpoint::init(g.arch, 6).unwrap().encoder;
        crate::model::jitter(&mut enc, 3, 0.2);
        let mut grads = vec![0.0; enc.params.len()];
        encoder_loss(&enc, &g, &data, &damaged, 0.5, Some(&mut grads));
        let h = 1e-5;
        let len = enc.params.len();
        for k in 0..24 {
            let idx = (k * 7919) % len;
            let orig = enc.params[idx];
            enc.params[idx] = orig + h;
            let up = encoder_loss(&enc, &g, &data, &damaged, 0.5, None).loss;
            enc.params[idx] = orig - h;
            let down = encoder_loss(&enc, &g, &data, &damaged, 0.5, None).loss;
            enc.params[idx] = orig;
            let fd = (up - down) / (2.0 * h);
            let err = (fd - grads[idx]).abs() / fd.abs().max(grads[idx].abs()).max(1e-6);
            assert!(err <= 1e-3, "param {idx}: fd {fd} vs analytic {}", grads[idx]);
        }
    }

    #[test]
    fn pairing_checks_latent_space() {
        let g = gan();
        let ok = InitializerCheckpoint::init(g.arch, 0).unwrap();
        assert!(ok.ensure_pairs_with(&g).is_ok());
        let other = InitializerCheckpoint::init(Architecture::new(9, 16, 2).unwrap(), 0).unwrap();
        assert!(other.ensure_pairs_with(&g).is_err());
    }

    #[test]
    fn weight_bytes_round_trip() {
        let ckpt = InitializerCheckpoint::init(Architecture::new(8, 16, 2).unwrap(), 7).unwrap();
        let back = InitializerCheckpoint::from_parts(ckpt.arch, &ckpt.weight_bytes(), 0, Vec::new()).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.weight_bytes(), ckpt.weight_bytes());
    }
}
