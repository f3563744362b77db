//! DCGAN-style generator and discriminator, adversarial training, and the
//! checkpoint container.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{bail, Error, Result};
use crate::image::{Image, LatentVector, CHANNELS};
use crate::math;
use crate::nn::codec::{self, NamedTensor};
use crate::nn::{Adam, AdamConfig, Batch, Mode, Sequential, SequentialBuilder, Shape, Tape};
use crate::rng;

pub const LEAKY_SLOPE: f64 = 0.2;

/// Topology shared by every network of one model family.
///
/// The generator projects the latent to a `4×4` map with `base_width·2^(L-1)`
/// channels and doubles the resolution `L` times, halving channels each time
/// until the final 3-channel `tanh` layer. The discriminator mirrors it with
/// stride-2 convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Architecture {
    pub latent_dim: usize,
    pub resolution: usize,
    pub base_width: usize,
}

impl Architecture {
    pub const DEFAULT_LATENT_DIM: usize = 100;

    pub fn new(latent_dim: usize, resolution: usize, base_width: usize) -> Result<Self> {
        let arch = Self {
            latent_dim,
            resolution,
            base_width,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            bail!(Config, "latent_dim must be positive");
        }
        if self.base_width == 0 {
            bail!(Config, "base_width must be positive");
        }
        if !matches!(self.resolution, 16 | 32 | 64 | 128) {
            bail!(Config, "resolution {} not in {{16, 32, 64, 128}}", self.resolution);
        }
        Ok(())
    }

    /// Number of stride-2 stages between `4×4` and the image.
    pub fn stages(&self) -> usize {
        (self.resolution / 4).trailing_zeros() as usize
    }

    pub fn image_shape(&self) -> Shape {
        Shape::new(CHANNELS, self.resolution, self.resolution)
    }

    fn top_width(&self) -> usize {
        self.base_width << (self.stages() - 1)
    }

    pub fn generator(&self) -> Sequential {
        let top = self.top_width();
        let mut b = SequentialBuilder::new(Shape::vector(self.latent_dim))
            .linear(top * 16)
            .reshape(Shape::new(top, 4, 4))
            .batch_norm()
            .relu();
        let mut width = top;
        for _ in 1..self.stages() {
            width /= 2;
            b = b.conv_t(width).batch_norm().relu();
        }
        b.conv_t(CHANNELS).tanh().build()
    }

    /// Stride-2 convolution stack from the image down to `4×4`.
    pub fn conv_trunk(&self) -> SequentialBuilder {
        let mut b = SequentialBuilder::new(self.image_shape());
        let mut width = self.base_width;
        for _ in 0..self.stages() {
            b = b.conv(width).leaky_relu(LEAKY_SLOPE);
            width *= 2;
        }
        b
    }

    /// Emits a single logit.
    pub fn discriminator(&self) -> Sequential {
        self.conv_trunk().linear(1).build()
    }
}

/// A layer stack together with its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub net: Sequential,
    pub params: Vec<f64>,
    pub buffers: Vec<f64>,
}

impl Network {
    pub fn init<R: Rng + ?Sized>(net: Sequential, rng: &mut R) -> Self {
        let (params, buffers) = net.init(rng);
        Self {
            net,
            params,
            buffers,
        }
    }

    pub fn infer(&self, x: &Batch) -> Batch {
        self.net.infer(&self.params, &self.buffers, x)
    }

    pub fn forward(&self, x: &Batch, mode: Mode) -> (Batch, Tape) {
        self.net.forward(&self.params, &self.buffers, x, mode)
    }

    pub fn backward(&self, tape: &Tape, dy: Batch, grads: Option<&mut [f64]>) -> Batch {
        self.net.backward(&self.params, tape, dy, grads)
    }

    pub fn tensors(&self, prefix: &str) -> Vec<NamedTensor> {
        vec![
            NamedTensor::new(&format!("{prefix}.params"), self.params.clone()),
            NamedTensor::new(&format!("{prefix}.buffers"), self.buffers.clone()),
        ]
    }

    pub fn from_tensors(net: Sequential, tensors: &mut Vec<NamedTensor>, prefix: &str) -> Result<Self> {
        let params = codec::take_tensor(tensors, &format!("{prefix}.params"), net.param_len())?;
        let buffers = codec::take_tensor(tensors, &format!("{prefix}.buffers"), net.buffer_len())?;
        if params.iter().chain(&buffers).any(|v| !v.is_finite()) {
            bail!(Load, "{prefix} weights contain non-finite values");
        }
        Ok(Self {
            net,
            params,
            buffers,
        })
    }

    pub fn to_bytes(&self, prefix: &str) -> Vec<u8> {
        codec::encode(&self.tensors(prefix))
    }

    pub fn from_bytes(net: Sequential, bytes: &[u8], prefix: &str) -> Result<Self> {
        let mut tensors = codec::decode(bytes)?;
        let out = Self::from_tensors(net, &mut tensors, prefix)?;
        if let Some(extra) = tensors.first() {
            bail!(Load, "unexpected tensor {}", extra.name);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GanTrainConfig {
    pub batch_size: usize,
    pub steps: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub beta1: f64,
    pub seed: u64,
    /// Samples used to re-estimate generator batch-norm statistics after
    /// training; 0 keeps the running averages.
    pub bn_recalibration: usize,
}

impl Default for GanTrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            steps: 3000,
            lr_generator: 2e-4,
            lr_discriminator: 2e-4,
            beta1: 0.5,
            seed: 0,
            bn_recalibration: 512,
        }
    }
}

impl GanTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            bail!(Config, "batch_size must be positive");
        }
        if !(self.lr_generator > 0.0 && self.lr_discriminator > 0.0) {
            bail!(Config, "learning rates must be positive");
        }
        Ok(())
    }
}

/// One adversarial step's losses and mean discriminator scores.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GanStepRecord {
    pub step: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub d_real: f64,
    pub d_fake: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub arch: Architecture,
    pub generator: Network,
    pub discriminator: Network,
    pub step: usize,
    pub history: Vec<GanStepRecord>,
}

impl ModelCheckpoint {
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut r = rng::child(seed, 0);
        Ok(Self {
            arch,
            generator: Network::init(arch.generator(), &mut r),
            discriminator: Network::init(arch.discriminator(), &mut r),
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

    pub fn check_latent(&self, z: &LatentVector) -> Result<()> {
        if z.dim() != self.arch.latent_dim {
            bail!(
                Dimension,
                "latent of length {} for a model with latent_dim {}",
                z.dim(),
                self.arch.latent_dim
            );
        }
        Ok(())
    }

    pub fn check_image(&self, image: &Image) -> Result<()> {
        let r = self.arch.resolution;
        if image.dims() != (r, r) {
            bail!(
                Dimension,
                "image {}x{} for a {r}x{r} model",
                image.height(),
                image.width()
            );
        }
        Ok(())
    }

    /// Maps latents to images with the generator in inference mode.
    pub fn generate(&self, zs: &[LatentVector]) -> Result<Vec<Image>> {
        for z in zs {
            self.check_latent(z)?;
        }
        let x = latents_to_batch(zs, self.arch.latent_dim);
        let y = self.generator.infer(&x);
        Ok(batch_to_images(&y))
    }

    /// Probability of each image being real, strictly inside `(0, 1)`.
    pub fn discriminate(&self, images: &[Image]) -> Result<Vec<f64>> {
        for im in images {
            self.check_image(im)?;
        }
        let x = images_to_batch(images, self.arch.image_shape());
        Ok(self
            .discriminator
            .infer(&x)
            .data
            .into_iter()
            .map(probability)
            .collect())
    }

    pub fn generator_bytes(&self) -> Vec<u8> {
        self.generator.to_bytes("generator")
    }

    pub fn discriminator_bytes(&self) -> Vec<u8> {
        self.discriminator.to_bytes("discriminator")
    }

    pub fn from_parts(
        arch: Architecture,
        generator_bytes: &[u8],
        discriminator_bytes: &[u8],
        step: usize,
        history: Vec<GanStepRecord>,
    ) -> Result<Self> {
        arch.validate().map_err(|e| Error::Load(format!("{e}")))?;
        Ok(Self {
            arch,
            generator: Network::from_bytes(arch.generator(), generator_bytes, "generator")?,
            discriminator: Network::from_bytes(arch.discriminator(), discriminator_bytes, "discriminator")?,
            step,
            history,
        })
    }
}

/// Sigmoid squeezed into the open unit interval.
pub fn probability(logit: f64) -> f64 {
    math::sigmoid(logit).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub fn latents_to_batch(zs: &[LatentVector], dim: usize) -> Batch {
    let mut data = Vec::with_capacity(zs.len() * dim);
    for z in zs {
        data.extend_from_slice(z);
    }
    Batch::new(zs.len(), Shape::vector(dim), data)
}

pub fn images_to_batch(images: &[Image], shape: Shape) -> Batch {
    let mut data = Vec::with_capacity(images.len() * shape.len());
    for im in images {
        data.extend_from_slice(im.planar());
    }
    Batch::new(images.len(), shape, data)
}

pub fn batch_to_images(b: &Batch) -> Vec<Image> {
    (0..b.n)
        .map(|i| Image::from_planar(b.shape.h, b.shape.w, b.sample(i).to_vec()).unwrap())
        .collect()
}

pub(crate) fn check_dataset(images: &[Image], resolution: usize) -> Result<()> {
    if images.is_empty() {
        bail!(Data, "dataset is empty");
    }
    if let Some(bad) = images.iter().position(|im| im.dims() != (resolution, resolution)) {
        bail!(
            Data,
            "item {bad} is {}x{}, expected {resolution}x{resolution}",
            images[bad].height(),
            images[bad].width()
        );
    }
    Ok(())
}

/// Adversarial training: alternating single discriminator and generator
/// steps, non-saturating generator loss `-log D(G(z))`.
pub fn train_gan(images: &[Image], arch: Architecture, config: &GanTrainConfig) -> Result<ModelCheckpoint> {
    train_gan_with(images, arch, config, |_| {})
}

pub fn train_gan_with(
    images: &[Image],
    arch: Architecture,
    config: &GanTrainConfig,
    mut observe: impl FnMut(&GanStepRecord),
) -> Result<ModelCheckpoint> {
    config.validate()?;
    arch.validate()?;
    check_dataset(images, arch.resolution)?;
    let mut ckpt = ModelCheckpoint::init(arch, config.seed)?;
    let mut r = rng::child(config.seed, 1);
    let b = config.batch_size;
    let (gl, dl) = (ckpt.generator.params.len(), ckpt.discriminator.params.len());
    let mut opt_g = Adam::new(AdamConfig::new(config.lr_generator).with_betas(config.beta1, 0.999), gl);
    let mut opt_d = Adam::new(AdamConfig::new(config.lr_discriminator).with_betas(config.beta1, 0.999), dl);
    let shape = arch.image_shape();

    for step in 0..config.steps {
        let real: Vec<Image> = (0..b).map(|_| images[r.random_range(0..images.len())].clone()).collect();
        let zs: Vec<LatentVector> = (0..b).map(|_| LatentVector::sample_prior(arch.latent_dim, &mut r)).collect();

        let (fake, g_tape) = ckpt.generator.forward(&latents_to_batch(&zs, arch.latent_dim), Mode::Train);
        let g_net = ckpt.generator.net.clone();
        g_net.update_running_stats(&mut ckpt.generator.buffers, &g_tape, 0.1);

        // Discriminator step on real and detached fake samples.
        let mut d_grads = vec![0.0; dl];
        let (real_logits, real_tape) = ckpt.discriminator.forward(&images_to_batch(&real, shape), Mode::Train);
        let mut d_loss = 0.0;
        let mut d_real = 0.0;
        let dy: Vec<f64> = real_logits
            .data
            .iter()
            .map(|&l| {
                d_loss += math::softplus(-l) / b as f64;
                d_real += math::sigmoid(l) / b as f64;
                (math::sigmoid(l) - 1.0) / b as f64
            })
            .collect();
        ckpt.discriminator
            .backward(&real_tape, Batch::new(b, Shape::vector(1), dy), Some(&mut d_grads));
        let (fake_logits, fake_tape) = ckpt.discriminator.forward(&fake, Mode::Train);
        let mut d_fake = 0.0;
        let dy: Vec<f64> = fake_logits
            .data
            .iter()
            .map(|&l| {
                d_loss += math::softplus(l) / b as f64;
                d_fake += math::sigmoid(l) / b as f64;
                math::sigmoid(l) / b as f64
            })
            .collect();
        ckpt.discriminator
            .backward(&fake_tape, Batch::new(b, Shape::vector(1), dy), Some(&mut d_grads));
        opt_d.step(&mut ckpt.discriminator.params, &d_grads);

        // Generator step through the updated discriminator.
        let (logits, tape) = ckpt.discriminator.forward(&fake, Mode::Train);
        let mut g_loss = 0.0;
        let dy: Vec<f64> = logits
            .data
            .iter()
            .map(|&l| {
                g_loss += math::softplus(-l) / b as f64;
                (math::sigmoid(l) - 1.0) / b as f64
            })
            .collect();
        let d_fake_img = ckpt.discriminator.backward(&tape, Batch::new(b, Shape::vector(1), dy), None);
        let mut g_grads = vec![0.0; gl];
        ckpt.generator.backward(&g_tape, d_fake_img, Some(&mut g_grads));
        opt_g.step(&mut ckpt.generator.params, &g_grads);

        let record = GanStepRecord {
            step,
            d_loss,
            g_loss,
            d_real,
            d_fake,
        };
        if !(d_loss.is_finite() && g_loss.is_finite())
            || ckpt.generator.params.iter().chain(&ckpt.discriminator.params).any(|v| !v.is_finite())
        {
            return Err(Error::Training {
                step,
                what: format!("d_loss {d_loss}, g_loss {g_loss}"),
            });
        }
        observe(&record);
        ckpt.history.push(record);
        ckpt.step = step + 1;
    }

    if config.steps > 0 && config.bn_recalibration > 0 {
        recalibrate_generator(&mut ckpt, config.bn_recalibration, rng::derive_seed(config.seed, 2));
    }
    Ok(ckpt)
}

/// Replaces generator batch-norm running statistics with population
/// statistics over `samples` prior draws.
pub fn recalibrate_generator(ckpt: &mut ModelCheckpoint, samples: usize, seed: u64) {
    let mut r = rng::seeded(seed);
    let dim = ckpt.arch.latent_dim;
    let zs: Vec<LatentVector> = (0..samples).map(|_| LatentVector::sample_prior(dim, &mut r)).collect();
    let (_, tape) = ckpt.generator.forward(&latents_to_batch(&zs, dim), Mode::Train);
    let net = ckpt.generator.net.clone();
    net.update_running_stats(&mut ckpt.generator.buffers, &tape, 1.0);
}

/// Freshly initialized networks are nearly constant; tests that compare
/// gradients need weights with some spread.
#[cfg(test)]
pub(crate) fn jitter(net: &mut Network, seed: u64, amount: f64) {
    let mut r = rng::seeded(seed);
    for p in &mut net.params {
        *p += r.random_range(-amount..amount);
    }
}
