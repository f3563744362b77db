use inpaint_core::inpaint::blend;
use inpaint_core::mask::{apply_mask, make_mask};
use inpaint_core::metrics::{psnr, PSNR_CAP_DB};
use inpaint_core::model::{Architecture, ModelCheckpoint};
use inpaint_core::sequence::{smoothness_gradient, smoothness_loss};
use inpaint_core::stats::{median, wilcoxon_signed_rank};
use inpaint_core::{CorruptionSpec, Image, LatentVector, MaskKind};
use proptest::prelude::*;

fn image(h: usize, w: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(-1.0f64..=1.0, 3 * h * w).prop_map(move |v| Image::from_planar(h, w, v).unwrap())
}

fn latents(n: usize, d: usize) -> impl Strategy<Value = Vec<LatentVector>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, d).prop_map(LatentVector), n)
}

fn kinds() -> impl Strategy<Value = MaskKind> {
    prop::sample::select(MaskKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn masks_are_deterministic_binary_and_sized(kind in kinds(), seed in any::<u64>()) {
        let spec = CorruptionSpec::new(kind, seed).with_block_sizes(&[4, 8]);
        let m = make_mask(&spec, (16, 16)).unwrap();
        prop_assert_eq!(m.dims(), (16, 16));
        prop_assert!(m.bits().iter().all(|&b| b <= 1));
        prop_assert!(m.corrupted_count() > 0 && m.corrupted_count() < 256);
        prop_assert_eq!(make_mask(&spec, (16, 16)).unwrap(), m);
    }

    #[test]
    fn blend_keeps_observed_pixels_and_fills_holes(kind in kinds(), seed in 0u64..1000, x in image(16, 16), g in image(16, 16)) {
        let m = make_mask(&CorruptionSpec::new(kind, seed).with_block_sizes(&[4, 8]), (16, 16)).unwrap();
        let damaged = apply_mask(&x, &m).unwrap();
        let out = blend(&damaged, &m, &g).unwrap();
        for c in 0..3 {
            for y in 0..16 {
                for xx in 0..16 {
                    let want = if m.get(y, xx) == 1 { x.get(y, xx, c) } else { g.get(y, xx, c) };
                    prop_assert_eq!(out.get(y, xx, c), want);
                }
            }
        }
    }

    #[test]
    fn psnr_is_symmetric_and_capped_only_for_equal_images(a in image(8, 8), b in image(8, 8)) {
        let ab = psnr(&a, &b).unwrap();
        prop_assert_eq!(ab, psnr(&b, &a).unwrap());
        prop_assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP_DB);
        if a != b {
            prop_assert!((0.0..PSNR_CAP_DB).contains(&ab));
        }
    }

    #[test]
    fn smoothness_is_nonnegative_and_shift_invariant(zs in latents(4, 6), shift in prop::collection::vec(-2.0f64..2.0, 6)) {
        let l = smoothness_loss(&zs).unwrap();
        prop_assert!(l >= 0.0);
        let moved: Vec<LatentVector> = zs
            .iter()
            .map(|z| LatentVector(z.iter().zip(&shift).map(|(a, s)| a + s).collect()))
            .collect();
        prop_assert!((smoothness_loss(&moved).unwrap() - l).abs() <= 1e-9 * (1.0 + l));
        // The gradient of a translation-invariant loss sums to zero over frames.
        let g = smoothness_gradient(&zs).unwrap();
        for k in 0..6 {
            let s: f64 = g.iter().map(|gi| gi[k]).sum();
            prop_assert!(s.abs() < 1e-9);
        }
    }

    #[test]
    fn wilcoxon_p_is_a_symmetric_probability(a in prop::collection::vec(-5.0f64..5.0, 20..60), noise in prop::collection::vec(-5.0f64..5.0, 60)) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let p = wilcoxon_signed_rank(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((wilcoxon_signed_rank(&b, &a).unwrap() - p).abs() < 1e-12);
        prop_assert_eq!(wilcoxon_signed_rank(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn median_lies_between_extremes(xs in prop::collection::vec(-1e3f64..1e3, 1..50)) {
        let m = median(&xs);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= m && m <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generator_is_pure_and_bounded(seed in 0u64..50, zs in latents(3, 8)) {
        let ckpt = ModelCheckpoint::init(Architecture::new(8, 16, 2).unwrap(), seed).unwrap();
        let a = ckpt.generate(&zs).unwrap();
        prop_assert_eq!(&a, &ckpt.generate(&zs).unwrap());
        prop_assert!(a.iter().all(|img| img.is_in_range() && img.dims() == (16, 16)));
        let p = ckpt.discriminate(&a).unwrap();
        prop_assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
    }
}

#[test]
fn wrong_latent_length_is_rejected() {
    let ckpt = ModelCheckpoint::init(Architecture::new(8, 16, 2).unwrap(), 0).unwrap();
    assert!(ckpt.generate(&[LatentVector(vec![0.0; 7])]).is_err());
    assert!(ckpt.discriminate(&[Image::filled(8, 8, 0.0)]).is_err());
}
