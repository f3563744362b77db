//! Joint inpainting of a window of frames with a pairwise latent smoothness
//! penalty.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{bail, Error, Result};
use crate::image::{Image, LatentVector};
use crate::inpaint::{blend, evaluate, should_record, InpaintResult, OptimConfig, Stepper, TracePoint};
use crate::mask::Mask;
use crate::model::ModelCheckpoint;

fn check_window(latents: &[LatentVector]) -> Result<usize> {
    if latents.len() < 2 {
        bail!(Arity, "smoothness needs at least 2 latents, got {}", latents.len());
    }
    let d = latents[0].dim();
    if latents.iter().any(|z| z.dim() != d) {
        bail!(Dimension, "latents in one window must share a length");
    }
    Ok(d)
}

fn pair_count(w: usize) -> f64 {
    (w * (w - 1) / 2) as f64
}

/// Mean squared L2 distance over all unordered pairs.
pub fn smoothness_loss(latents: &[LatentVector]) -> Result<f64> {
    check_window(latents)?;
    let mut sum = 0.0;
    for i in 0..latents.len() {
        for j in i + 1..latents.len() {
            sum += latents[i].squared_distance(&latents[j]);
        }
    }
    Ok(sum / pair_count(latents.len()))
}

/// `∂l_sm/∂z_i = (2/C(W,2)) Σ_{j≠i} (z_i − z_j)`.
pub fn smoothness_gradient(latents: &[LatentVector]) -> Result<Vec<Vec<f64>>> {
    let d = check_window(latents)?;
    let w = latents.len();
    let scale = 2.0 / pair_count(w);
    let mut sum = vec![0.0; d];
    for z in latents {
        for (s, v) in sum.iter_mut().zip(z.iter()) {
            *s += v;
        }
    }
    // Σ_{j≠i}(z_i − z_j) = W·z_i − Σ_j z_j
    Ok(latents
        .iter()
        .map(|z| {
            z.iter()
                .zip(&sum)
                .map(|(v, s)| scale * (w as f64 * v - s))
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothnessPoint {
    pub iteration: usize,
    pub l_sm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SequenceOptimConfig {
    pub base: OptimConfig,
    /// Weight of the smoothness term in the joint objective.
    pub mu: f64,
}

impl Default for SequenceOptimConfig {
    fn default() -> Self {
        Self {
            base: OptimConfig::default(),
            mu: 0.1,
        }
    }
}

impl SequenceOptimConfig {
    pub fn new(base: OptimConfig, mu: f64) -> Self {
        Self { base, mu }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.mu >= 0.0) {
            bail!(Config, "mu must be non-negative");
        }
        Ok(())
    }
}

/// Damaged frames of one window, their masks, and once optimized the
/// per-frame results.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceWindow {
    pub frames: Vec<Image>,
    pub masks: Vec<Mask>,
    pub results: Vec<InpaintResult>,
    pub smoothness_trace: Vec<SmoothnessPoint>,
    /// Joint objective over the recorded iterations.
    pub joint_trace: Vec<TracePoint>,
}

impl SequenceWindow {
    pub fn new(frames: Vec<Image>, masks: Vec<Mask>) -> Result<Self> {
        if frames.len() != masks.len() {
            bail!(Arity, "{} frames but {} masks", frames.len(), masks.len());
        }
        if frames.len() < 2 {
            bail!(Arity, "a window needs at least 2 frames");
        }
        for (f, m) in frames.iter().zip(&masks) {
            frames[0].ensure_same_shape(f)?;
            m.ensure_matches(f)?;
        }
        Ok(Self {
            frames,
            masks,
            results: Vec::new(),
            smoothness_trace: Vec::new(),
            joint_trace: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn is_optimized(&self) -> bool {
        !self.results.is_empty()
    }

    pub fn latents(&self) -> Vec<LatentVector> {
        self.results.iter().map(|r| r.z_hat.clone()).collect()
    }

    pub fn inpainted(&self) -> Vec<Image> {
        self.results.iter().map(|r| r.inpainted.clone()).collect()
    }
}

/// Iteration, objective, latents, generated frames and per-frame totals.
type BestIterate = (usize, f64, Vec<LatentVector>, Vec<Image>, Vec<f64>);

/// Descends jointly on `Σ_k [contextual_k + η·perceptual_k] + μ·l_sm` with
/// one optimizer over the concatenated latents. Returns the window with the
/// per-frame results taken at the best joint iterate.
pub fn optimize_window(
    window: SequenceWindow,
    z_inits: &[LatentVector],
    gan: &ModelCheckpoint,
    config: &SequenceOptimConfig,
) -> Result<SequenceWindow> {
    config.validate()?;
    let w = window.len();
    if z_inits.len() != w {
        bail!(Dimension, "{} initial latents for a window of {w}", z_inits.len());
    }
    for z in z_inits {
        gan.check_latent(z)?;
    }
    for f in &window.frames {
        gan.check_image(f)?;
    }
    let cfg = &config.base;
    let d = gan.latent_dim();
    let mut x: Vec<f64> = z_inits.iter().flat_map(|z| z.iter().copied()).collect();
    let mut stepper = Stepper::new(cfg, x.len());
    let mut traces = vec![Vec::new(); w];
    let mut sm_trace = Vec::new();
    let mut joint_trace = Vec::new();
    let mut best: Option<BestIterate> = None;

    for it in 0..=cfg.max_iters {
        let last = it == cfg.max_iters;
        let zs: Vec<LatentVector> = x.chunks(d).map(|c| LatentVector(c.to_vec())).collect();
        let mut grad = Vec::with_capacity(x.len());
        let mut evals = Vec::with_capacity(w);
        for k in 0..w {
            let e = evaluate(&zs[k], &window.frames[k], &window.masks[k], gan, cfg.eta, !last)?;
            if let Some(g) = &e.gradient {
                grad.extend_from_slice(g);
            }
            evals.push(e);
        }
        let l_sm = smoothness_loss(&zs)?;
        let (mut con, mut per, mut frames_total) = (0.0, 0.0, 0.0);
        for e in &evals {
            con += e.contextual;
            per += e.perceptual;
            frames_total += e.total;
        }
        let joint = frames_total + config.mu * l_sm;
        let point = TracePoint {
            iteration: it,
            contextual: con,
            perceptual: per,
            total: joint,
        };
        if !joint.is_finite() || !x.iter().all(|v| v.is_finite()) {
            joint_trace.push(point);
            return Err(Error::Optimization {
                iteration: it,
                trace: joint_trace,
            });
        }
        if should_record(it, cfg.max_iters, cfg.record_every) {
            for (t, e) in traces.iter_mut().zip(&evals) {
                t.push(TracePoint {
                    iteration: it,
                    contextual: e.contextual,
                    perceptual: e.perceptual,
                    total: e.total,
                });
            }
            sm_trace.push(SmoothnessPoint { iteration: it, l_sm });
            joint_trace.push(point);
        }
        if best.as_ref().is_none_or(|b| joint < b.1) {
            let frame_totals = evals.iter().map(|e| e.total).collect();
            let generated = evals.into_iter().map(|e| e.generated).collect();
            best = Some((it, joint, zs, generated, frame_totals));
        }
        if !last {
            if config.mu != 0.0 {
                let sg = smoothness_gradient(&x.chunks(d).map(|c| LatentVector(c.to_vec())).collect::<Vec<_>>())?;
                for (g, s) in grad.iter_mut().zip(sg.iter().flatten()) {
                    *g += config.mu * s;
                }
            }
            stepper.step(&mut x, &grad);
        }
    }

    let (best_iteration, _, zs, generated, totals) = best.expect("at least one iterate");
    let mut out = window;
    out.results = Vec::with_capacity(w);
    for (k, ((z, g), trace)) in zs.into_iter().zip(generated).zip(traces).enumerate() {
        out.results.push(InpaintResult {
            inpainted: blend(&out.frames[k], &out.masks[k], &g)?,
            z_hat: z,
            trace,
            iters_run: cfg.max_iters,
            best_iteration,
            best_total: totals[k],
        });
    }
    out.smoothness_trace = sm_trace;
    out.joint_trace = joint_trace;
    Ok(out)
}

/// Start/end frame ranges covering `frames` in windows of `w`; a final
/// partial window is shifted back to end on the last frame.
pub fn window_ranges(frames: usize, w: usize, stride: usize) -> Result<Vec<Range<usize>>> {
    if w < 2 || stride == 0 {
        bail!(Config, "window must be at least 2 and stride positive");
    }
    if frames < w {
        bail!(Arity, "{frames} frames cannot fill a window of {w}");
    }
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        if start + w >= frames {
            out.push(frames - w..frames);
            break;
        }
        out.push(start..start + w);
        start += stride;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inpaint::optimize_latent;
    use crate::mask::{apply_mask, make_mask, CorruptionSpec, MaskKind};
    use crate::model::Architecture;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn identical_latents_have_zero_loss() {
        let z = LatentVector(vec![0.3, -0.2, 0.9]);
        assert_eq!(smoothness_loss(&[z.clone(), z.clone(), z]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_pair() {
        let a = LatentVector::zeros(100);
        let b = LatentVector(vec![0.1; 100]);
        assert!((smoothness_loss(&[a, b]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arity_and_dimension_errors() {
        assert!(matches!(smoothness_loss(&[LatentVector::zeros(3)]), Err(Error::Arity(_))));
        assert!(matches!(
            smoothness_loss(&[LatentVector::zeros(3), LatentVector::zeros(4)]),
            Err(Error::Dimension(_))
        ));
    }

    fn latents(w: usize, d: usize) -> impl Strategy<Value = Vec<LatentVector>> {
        proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, d), w)
            .prop_map(|v| v.into_iter().map(LatentVector).collect())
    }

    proptest! {
        #[test]
        fn quadratic_under_scaling(zs in latents(4, 5)) {
            let base = smoothness_loss(&zs).unwrap();
            let doubled: Vec<LatentVector> =
                zs.iter().map(|z| LatentVector(z.iter().map(|v| 2.0 * v).collect())).collect();
            let scaled = smoothness_loss(&doubled).unwrap();
            prop_assert!((scaled - 4.0 * base).abs() <= 1e-12 * (1.0 + scaled));
        }

        #[test]
        fn permutation_invariant(zs in latents(4, 3), rot in 0usize..4) {
            let mut p = zs.clone();
            p.rotate_left(rot);
            p.swap(0, 1);
            let a = smoothness_loss(&zs).unwrap();
            let b = smoothness_loss(&p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn zero_only_for_identical(zs in latents(3, 4)) {
            let l = smoothness_loss(&zs).unwrap();
            prop_assert!(l >= 0.0);
            prop_assert_eq!(l == 0.0, zs.iter().all(|z| z == &zs[0]));
        }

        #[test]
        fn gradient_matches_finite_differences(zs in latents(3, 4)) {
            let g = smoothness_gradient(&zs).unwrap();
            let h = 1e-5;
            for i in 0..3 {
                for k in 0..4 {
                    let mut p = zs.clone();
                    p[i].0[k] += h;
                    let up = smoothness_loss(&p).unwrap();
                    p[i].0[k] -= 2.0 * h;
                    let fd = (up - smoothness_loss(&p).unwrap()) / (2.0 * h);
                    prop_assert!((fd - g[i][k]).abs() <= 1e-6 * g[i][k].abs().max(1.0));
                }
            }
        }
    }

    fn setup(w: usize) -> (ModelCheckpoint, SequenceWindow, Vec<LatentVector>) {
        let ckpt = ModelCheckpoint::init(Architecture::new(8, 16, 2).unwrap(), 5).unwrap();
        let mut r = rng::seeded(11);
        let img = Image::from_planar(16, 16, (0..768).map(|_| r.random_range(-0.9..0.9)).collect()).unwrap();
        let mut frames = Vec::new();
        let mut masks = Vec::new();
        for k in 0..w {
            let m = make_mask(&CorruptionSpec::new(MaskKind::Central, k as u64), (16, 16)).unwrap();
            frames.push(apply_mask(&img, &m).unwrap());
            masks.push(m);
        }
        let zs = (0..w).map(|_| LatentVector::sample_prior(8, &mut r)).collect();
        (ckpt, SequenceWindow::new(frames, masks).unwrap(), zs)
    }

    #[test]
    fn zero_mu_decouples_frames() {
        let (ckpt, window, zs) = setup(2);
        let base = OptimConfig {
            max_iters: 30,
            ..OptimConfig::default()
        };
        let joint = optimize_window(window.clone(), &zs, &ckpt, &SequenceOptimConfig::new(base, 0.0)).unwrap();
        for k in 0..2 {
            let single = optimize_latent(&window.frames[k], &window.masks[k], &zs[k], &ckpt, &base).unwrap();
            assert_eq!(joint.results[k].trace, single.trace);
        }
    }

    #[test]
    fn joint_trace_is_consistent() {
        let (ckpt, window, zs) = setup(3);
        let cfg = SequenceOptimConfig::new(
            OptimConfig {
                max_iters: 20,
                ..OptimConfig::default()
            },
            0.5,
        );
        let out = optimize_window(window, &zs, &ckpt, &cfg).unwrap();
        assert_eq!(out.smoothness_trace.len(), 21);
        for (i, j) in out.joint_trace.iter().enumerate() {
            let frames: f64 = out.results.iter().map(|r| r.trace[i].total).sum();
            let want = frames + cfg.mu * out.smoothness_trace[i].l_sm;
            assert!((j.total - want).abs() < 1e-9);
        }
        let best = out.results[0].best_iteration;
        let min = out.joint_trace.iter().map(|p| p.total).fold(f64::INFINITY, f64::min);
        assert_eq!(out.joint_trace[best].total, min);
        for (k, r) in out.results.iter().enumerate() {
            assert_eq!(blend(&out.frames[k], &out.masks[k], &r.inpainted).unwrap(), r.inpainted);
        }
    }

    #[test]
    fn large_mu_collapses_latents() {
        let (ckpt, window, zs) = setup(3);
        let cfg = SequenceOptimConfig::new(
            OptimConfig {
                max_iters: 300,
                learning_rate: 0.05,
                ..OptimConfig::default()
            },
            1e4,
        );
        let out = optimize_window(window, &zs, &ckpt, &cfg).unwrap();
        let l = out.latents();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(l[i].squared_distance(&l[j]).sqrt() < 1e-2);
            }
        }
    }

    #[test]
    fn window_validation() {
        let (ckpt, window, zs) = setup(2);
        assert!(matches!(
            optimize_window(window.clone(), &zs[..1], &ckpt, &SequenceOptimConfig::default()),
            Err(Error::Dimension(_))
        ));
        assert!(SequenceWindow::new(window.frames.clone(), window.masks[..1].to_vec()).is_err());
        assert!(!window.is_optimized());
    }

    #[test]
    fn window_ranges_cover_every_frame() {
        let r = window_ranges(7, 3, 3).unwrap();
        assert_eq!(r, vec![0..3, 3..6, 4..7]);
        assert_eq!(window_ranges(6, 3, 3).unwrap(), vec![0..3, 3..6]);
        assert_eq!(window_ranges(5, 3, 1).unwrap(), vec![0..3, 1..4, 2..5]);
        assert!(window_ranges(2, 3, 3).is_err());
    }
}
