//! Small identity embedder: a convolutional trunk with a unit-norm head,
//! trained as a scaled softmax classifier over identity labels.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{bail, Error, Result};
use crate::image::Image;
use crate::math;
use crate::metrics::Embedder;
use crate::model::{images_to_batch, Architecture, Network};
use crate::nn::{Adam, AdamConfig, Batch, Mode, Sequential};
use crate::rng;

pub const DEFAULT_EMBED_DIM: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmbedTrainConfig {
    pub e_dim: usize,
    pub base_width: usize,
    pub batch_size: usize,
    pub steps: usize,
    pub learning_rate: f64,
    /// Logit scale applied to embedding/class-weight products.
    pub scale: f64,
    pub seed: u64,
}

impl Default for EmbedTrainConfig {
    fn default() -> Self {
        Self {
            e_dim: DEFAULT_EMBED_DIM,
            base_width: 8,
            batch_size: 32,
            steps: 1500,
            learning_rate: 1e-3,
            scale: 16.0,
            seed: 0,
        }
    }
}

fn network(arch: &Architecture) -> Sequential {
    arch.conv_trunk().linear(arch.latent_dim).build()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyEmbedder {
    /// `latent_dim` doubles as the embedding size.
    pub arch: Architecture,
    pub net: Network,
}

fn normalize(u: &[f64]) -> (Vec<f64>, f64) {
    let r = math::sqrt(u.iter().map(|v| v * v).sum::<f64>()).max(1e-12);
    (u.iter().map(|v| v / r).collect(), r)
}

impl ToyEmbedder {
    pub fn init(e_dim: usize, resolution: usize, base_width: usize, seed: u64) -> Result<Self> {
        let arch = Architecture::new(e_dim, resolution, base_width)?;
        Ok(Self {
            arch,
            net: Network::init(network(&arch), &mut rng::child(seed, 30)),
        })
    }

    pub fn weight_bytes(&self) -> Vec<u8> {
        self.net.to_bytes("embedder")
    }

    pub fn from_parts(arch: Architecture, bytes: &[u8]) -> Result<Self> {
        arch.validate().map_err(|e| Error::Load(format!("{e}")))?;
        Ok(Self {
            arch,
            net: Network::from_bytes(network(&arch), bytes, "embedder")?,
        })
    }

    pub fn embed_all(&self, images: &[Image]) -> Vec<Vec<f64>> {
        let out = self.net.infer(&images_to_batch(images, self.arch.image_shape()));
        out.data.chunks(self.arch.latent_dim).map(|u| normalize(u).0).collect()
    }
}

impl Embedder for ToyEmbedder {
    fn dim(&self) -> usize {
        self.arch.latent_dim
    }

    fn embed(&self, image: &Image) -> Vec<f64> {
        self.embed_all(core::slice::from_ref(image)).remove(0)
    }
}

/// Fits the embedder on labelled images. Returns the model and the final
/// training-batch accuracy.
pub fn train_embedder(images: &[Image], labels: &[usize], config: &EmbedTrainConfig) -> Result<(ToyEmbedder, f64)> {
    if images.is_empty() || images.len() != labels.len() {
        bail!(Data, "{} images with {} labels", images.len(), labels.len());
    }
    if config.batch_size == 0 || !(config.learning_rate > 0.0) {
        bail!(Config, "batch_size and learning_rate must be positive");
    }
    let res = images[0].height();
    let mut emb = ToyEmbedder::init(config.e_dim, res, config.base_width, config.seed)?;
    crate::model::check_dataset(images, res)?;
    let classes = labels.iter().max().copied().unwrap_or(0) + 1;
    let e = config.e_dim;
    let mut r = rng::child(config.seed, 31);
    let mut class_w: Vec<f64> = (0..classes * e).map(|_| r.random_range(-0.1..0.1)).collect();
    let adam = AdamConfig::new(config.learning_rate);
    let mut opt_net = Adam::new(adam, emb.net.params.len());
    let mut opt_cls = Adam::new(adam, class_w.len());
    let mut accuracy = 0.0;
    let shape = emb.arch.image_shape();
    for step in 0..config.steps {
        let idx: Vec<usize> = (0..config.batch_size).map(|_| r.random_range(0..images.len())).collect();
        let batch: Vec<Image> = idx.iter().map(|&i| images[i].clone()).collect();
        let (u, tape) = emb.net.forward(&images_to_batch(&batch, shape), Mode::Train);
        let n = batch.len();
        let mut du = vec![0.0; u.data.len()];
        let mut dw = vec![0.0; class_w.len()];
        let mut loss = 0.0;
        let mut correct = 0usize;
        for (b, &i) in idx.iter().enumerate() {
            let (en, norm) = normalize(u.sample(b));
            let logits: Vec<f64> = (0..classes)
                .map(|c| config.scale * en.iter().zip(&class_w[c * e..(c + 1) * e]).map(|(x, y)| x * y).sum::<f64>())
                .collect();
            let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = logits.iter().map(|l| math::exp(l - top)).sum();
            let argmax = (0..classes).fold(0, |a, c| if logits[c] > logits[a] { c } else { a });
            if argmax == labels[i] {
                correct += 1;
            }
            loss += (top + math::ln(z) - logits[labels[i]]) / n as f64;
            let mut de = vec![0.0; e];
            for c in 0..classes {
                let p = math::exp(logits[c] - top) / z;
                let g = (p - if c == labels[i] { 1.0 } else { 0.0 }) * config.scale / n as f64;
                for k in 0..e {
                    dw[c * e + k] += g * en[k];
                    de[k] += g * class_w[c * e + k];
                }
            }
            let dot: f64 = de.iter().zip(&en).map(|(a, b)| a * b).sum();
            for k in 0..e {
                du[b * e + k] = (de[k] - en[k] * dot) / norm;
            }
        }
        if !loss.is_finite() {
            return Err(Error::Training {
                step,
                what: format!("embedder loss {loss}"),
            });
        }
        let mut grads = vec![0.0; emb.net.params.len()];
        emb.net.backward(&tape, Batch::new(n, u.shape, du), Some(&mut grads));
        opt_net.step(&mut emb.net.params, &grads);
        opt_cls.step(&mut class_w, &dw);
        accuracy = correct as f64 / n as f64;
    }
    Ok((emb, accuracy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::identity_loss;
    use crate::toyface;

    #[test]
    fn embeddings_are_unit_norm_and_deterministic() {
        let emb = ToyEmbedder::init(16, 16, 2, 3).unwrap();
        let set = toyface::synthesize(4, 16, 2, 0).unwrap();
        for im in &set.images {
            let v = emb.embed(im);
            assert_eq!(v.len(), 16);
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-5);
            assert_eq!(v, emb.embed(im));
        }
    }

    #[test]
    fn training_separates_identities() {
        let set = toyface::synthesize(136, 16, 4, 5).unwrap();
        let cfg = EmbedTrainConfig {
            e_dim: 16,
            base_width: 4,
            steps: 150,
            batch_size: 16,
            seed: 1,
            ..EmbedTrainConfig::default()
        };
        let (emb, _) = train_embedder(&set.images[..96], &set.labels[..96], &cfg).unwrap();
        let test = toyface::ToySet {
            images: set.images[96..].to_vec(),
            labels: set.labels[96..].to_vec(),
        };
        let (mut within, mut between) = (Vec::new(), Vec::new());
        for i in 0..test.images.len() {
            for j in i + 1..test.images.len() {
                let d = identity_loss(&test.images[i..=i], &test.images[j], &emb).unwrap();
                if test.labels[i] == test.labels[j] {
                    within.push(d);
                } else {
                    between.push(d);
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&within) < mean(&between), "{} vs {}", mean(&within), mean(&between));
    }

    #[test]
    fn bytes_round_trip() {
        let emb = ToyEmbedder::init(8, 16, 2, 1).unwrap();
        assert_eq!(ToyEmbedder::from_parts(emb.arch, &emb.weight_bytes()).unwrap(), emb);
    }
}
