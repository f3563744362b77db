//! Single-image inpainting by descent on the generator's latent space.
//!
//! The objective is `L_con(z) + η·L_per(z)` with the masked L1 contextual
//! term `Σ |M ⊙ (G(z) − I_d)|` and the perceptual term `log(1 − D(G(z)))`.
//! The result blends observed pixels with the generated fill.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Error, Result};
use crate::image::{Image, LatentVector, CHANNELS};
use crate::mask::Mask;
use crate::math;
use crate::model::{latents_to_batch, probability, ModelCheckpoint};
use crate::nn::{Adam, AdamConfig, Batch, Mode, SgdMomentum, Shape};
use crate::rng;

/// Clamp applied to the discriminator output before the perceptual log.
pub const PERCEPTUAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OptimizerKind {
    Adam,
    SgdMomentum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimConfig {
    /// Weight of the perceptual term.
    pub eta: f64,
    pub max_iters: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub record_every: usize,
    pub seed: u64,
    /// Independent random restarts after the first run; `1` means none.
    pub restarts: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self::random_init()
    }
}

impl OptimConfig {
    /// Budget for runs started from a prior sample.
    pub fn random_init() -> Self {
        Self {
            eta: 0.003,
            max_iters: 700,
            learning_rate: 0.1,
            optimizer: OptimizerKind::Adam,
            record_every: 1,
            seed: 0,
            restarts: 1,
        }
    }

    /// Budget for runs started from a learned initializer.
    pub fn learned_init() -> Self {
        Self {
            max_iters: 50,
            ..Self::random_init()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            bail!(Config, "max_iters must be at least 1");
        }
        if !(self.learning_rate > 0.0) {
            bail!(Config, "learning_rate must be positive");
        }
        if !(self.eta >= 0.0) {
            bail!(Config, "eta must be non-negative");
        }
        if self.record_every == 0 || self.restarts == 0 {
            bail!(Config, "record_every and restarts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TracePoint {
    pub iteration: usize,
    pub contextual: f64,
    pub perceptual: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InpaintResult {
    pub z_hat: LatentVector,
    pub inpainted: Image,
    pub trace: Vec<TracePoint>,
    pub iters_run: usize,
    /// Iteration at which `z_hat` was visited.
    pub best_iteration: usize,
    pub best_total: f64,
}

/// Direction-agnostic optimizer over a flat variable vector.
pub(crate) enum Stepper {
    Adam(Adam),
    Sgd(SgdMomentum),
}

impl Stepper {
    pub(crate) fn new(cfg: &OptimConfig, len: usize) -> Self {
        match cfg.optimizer {
            OptimizerKind::Adam => Stepper::Adam(Adam::new(AdamConfig::new(cfg.learning_rate), len)),
            OptimizerKind::SgdMomentum => Stepper::Sgd(SgdMomentum::new(cfg.learning_rate, 0.9, len)),
        }
    }

    pub(crate) fn step(&mut self, x: &mut [f64], g: &[f64]) {
        match self {
            Stepper::Adam(a) => a.step(x, g),
            Stepper::Sgd(s) => s.step(x, g),
        }
    }
}

/// Loss values at one latent, with the gradient when requested.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub contextual: f64,
    pub perceptual: f64,
    pub total: f64,
    pub generated: Image,
    pub gradient: Option<Vec<f64>>,
}

/// `log(1 − clamp(p, ε, 1 − ε))`.
pub fn perceptual_from_probability(p: f64) -> f64 {
    math::ln(1.0 - p.clamp(PERCEPTUAL_EPS, 1.0 - PERCEPTUAL_EPS))
}

/// Perceptual value and its derivative with respect to the logit.
/// Inside the clamp window `log(1 − σ(l)) = −softplus(l)`.
pub(crate) fn perceptual_from_logit(logit: f64) -> (f64, f64) {
    let p = math::sigmoid(logit);
    if p < PERCEPTUAL_EPS {
        (math::ln(1.0 - PERCEPTUAL_EPS), 0.0)
    } else if p > 1.0 - PERCEPTUAL_EPS {
        (math::ln(PERCEPTUAL_EPS), 0.0)
    } else {
        (-math::softplus(logit), -p)
    }
}

fn check_inputs(damaged: &Image, mask: &Mask, ckpt: &ModelCheckpoint) -> Result<()> {
    ckpt.check_image(damaged)?;
    mask.ensure_matches(damaged)
}

/// Evaluates the inpainting objective `contextual + eta·perceptual` at `z`.
pub fn evaluate(
    z: &LatentVector,
    damaged: &Image,
    mask: &Mask,
    ckpt: &ModelCheckpoint,
    eta: f64,
    with_gradient: bool,
) -> Result<Evaluation> {
    ckpt.check_latent(z)?;
    check_inputs(damaged, mask, ckpt)?;
    let shape = ckpt.arch.image_shape();
    let zb = latents_to_batch(core::slice::from_ref(z), z.dim());
    let (g_out, g_tape) = ckpt.generator.forward(&zb, Mode::Eval);
    let plane = shape.plane();

    let mut contextual = 0.0;
    let mut d_img = vec![0.0; shape.len()];
    for c in 0..CHANNELS {
        for p in 0..plane {
            if !mask.is_observed(p) {
                continue;
            }
            let i = c * plane + p;
            let r = g_out.data[i] - damaged.planar()[i];
            contextual += math::abs(r);
            d_img[i] = if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            };
        }
    }

    let (logits, d_tape) = ckpt.discriminator.forward(&g_out, Mode::Eval);
    let (perceptual, d_per_d_logit) = perceptual_from_logit(logits.data[0]);
    let total = contextual + eta * perceptual;

    let gradient = if with_gradient {
        if eta != 0.0 && d_per_d_logit != 0.0 {
            let dl = Batch::single(Shape::vector(1), vec![eta * d_per_d_logit]);
            let dx = ckpt.discriminator.backward(&d_tape, dl, None);
            for (a, b) in d_img.iter_mut().zip(&dx.data) {
                *a += b;
            }
        }
        let dz = ckpt
            .generator
            .backward(&g_tape, Batch::single(shape, d_img), None);
        Some(dz.data)
    } else {
        None
    };
    let generated = Image::from_planar(shape.h, shape.w, g_out.data)?;
    Ok(Evaluation {
        contextual,
        perceptual,
        total,
        generated,
        gradient,
    })
}

pub fn contextual_loss(z: &LatentVector, damaged: &Image, mask: &Mask, ckpt: &ModelCheckpoint) -> Result<f64> {
    Ok(evaluate(z, damaged, mask, ckpt, 0.0, false)?.contextual)
}

pub fn perceptual_loss(z: &LatentVector, ckpt: &ModelCheckpoint) -> Result<f64> {
    ckpt.check_latent(z)?;
    let g = ckpt.generator.infer(&latents_to_batch(core::slice::from_ref(z), z.dim()));
    let logit = ckpt.discriminator.infer(&g).data[0];
    Ok(perceptual_from_logit(logit).0)
}

/// Observed pixels from `damaged`, corrupted pixels from `generated`.
pub fn blend(damaged: &Image, mask: &Mask, generated: &Image) -> Result<Image> {
    damaged.ensure_same_shape(generated)?;
    mask.ensure_matches(damaged)?;
    let plane = damaged.plane();
    let mut out = generated.clone();
    let dst = out.planar_mut();
    for c in 0..CHANNELS {
        for p in 0..plane {
            if mask.is_observed(p) {
                dst[c * plane + p] = damaged.planar()[c * plane + p];
            }
        }
    }
    Ok(out)
}

pub(crate) fn should_record(it: usize, max_iters: usize, every: usize) -> bool {
    it == 0 || it == max_iters || it.is_multiple_of(every)
}

/// Descends on the objective from `z_init` and returns the best iterate seen.
pub fn optimize_latent(
    damaged: &Image,
    mask: &Mask,
    z_init: &LatentVector,
    ckpt: &ModelCheckpoint,
    config: &OptimConfig,
) -> Result<InpaintResult> {
    config.validate()?;
    ckpt.check_latent(z_init)?;
    check_inputs(damaged, mask, ckpt)?;
    let mut best = single_run(damaged, mask, z_init, ckpt, config)?;
    let mut r = rng::child(config.seed, 0x5e57a27);
    for _ in 1..config.restarts {
        let z0 = LatentVector::sample_prior(ckpt.latent_dim(), &mut r);
        let run = single_run(damaged, mask, &z0, ckpt, config)?;
        if run.best_total < best.best_total {
            best = run;
        }
    }
    Ok(best)
}

fn single_run(
    damaged: &Image,
    mask: &Mask,
    z_init: &LatentVector,
    ckpt: &ModelCheckpoint,
    config: &OptimConfig,
) -> Result<InpaintResult> {
    let mut z = z_init.clone();
    let mut stepper = Stepper::new(config, z.dim());
    let mut trace = Vec::new();
    let mut best: Option<(usize, LatentVector, f64, Image)> = None;
    for it in 0..=config.max_iters {
        let last = it == config.max_iters;
        let e = evaluate(&z, damaged, mask, ckpt, config.eta, !last)?;
        let point = TracePoint {
            iteration: it,
            contextual: e.contextual,
            perceptual: e.perceptual,
            total: e.total,
        };
        if !e.total.is_finite() || !z.iter().all(|v| v.is_finite()) {
            trace.push(point);
            return Err(Error::Optimization { iteration: it, trace });
        }
        if should_record(it, config.max_iters, config.record_every) {
            trace.push(point);
        }
        if best.as_ref().is_none_or(|b| e.total < b.2) {
            best = Some((it, z.clone(), e.total, e.generated));
        }
        if let Some(g) = e.gradient {
            stepper.step(&mut z, &g);
        }
    }
    let (best_iteration, z_hat, best_total, generated) = best.expect("at least one iterate");
    Ok(InpaintResult {
        inpainted: blend(damaged, mask, &generated)?,
        z_hat,
        trace,
        iters_run: config.max_iters,
        best_iteration,
        best_total,
    })
}

/// Discriminator probability of the generated image, for diagnostics.
pub fn realism(z: &LatentVector, ckpt: &ModelCheckpoint) -> Result<f64> {
    ckpt.check_latent(z)?;
    let g = ckpt.generator.infer(&latents_to_batch(core::slice::from_ref(z), z.dim()));
    Ok(probability(ckpt.discriminator.infer(&g).data[0]))
}
