//! Pseudo sequences: one image repeated under independently drawn masks.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::image::Image;
use crate::mask::{apply_mask, make_mask, CorruptionSpec, Mask};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSequence {
    pub source_item_id: String,
    pub source: Image,
    pub masks: Vec<Mask>,
    pub damaged: Vec<Image>,
    pub seed: u64,
}

impl PseudoSequence {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// The unmasked frames, all equal to the source.
    pub fn frames(&self) -> Vec<Image> {
        self.masks.iter().map(|_| self.source.clone()).collect()
    }
}

/// Masks `w` copies of `image`. `specs` holds one spec per frame or a single
/// spec reused for every frame; frame `k` draws from a sub-seed of `seed`.
pub fn build_pseudo_sequence(image: &Image, w: usize, specs: &[CorruptionSpec], seed: u64) -> Result<PseudoSequence> {
    if w < 2 {
        bail!(Arity, "a pseudo sequence needs at least 2 frames, got {w}");
    }
    if specs.len() != 1 && specs.len() != w {
        bail!(Arity, "{} mask specs for {w} frames", specs.len());
    }
    let mut masks = Vec::with_capacity(w);
    let mut damaged = Vec::with_capacity(w);
    for k in 0..w {
        let spec = specs[if specs.len() == 1 { 0 } else { k }]
            .clone()
            .with_seed(rng::derive_seed(seed, k as u64));
        let m = make_mask(&spec, image.dims())?;
        damaged.push(apply_mask(image, &m)?);
        masks.push(m);
    }
    Ok(PseudoSequence {
        source_item_id: String::new(),
        source: image.clone(),
        masks,
        damaged,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::MaskKind;
    use crate::toyface;

    fn face() -> Image {
        toyface::synthesize(1, 32, 1, 0).unwrap().images.remove(0)
    }

    #[test]
    fn half_masks_give_identical_frames() {
        let p = build_pseudo_sequence(&face(), 2, &[CorruptionSpec::new(MaskKind::HalfLeft, 0)], 5).unwrap();
        assert_eq!(p.damaged[0], p.damaged[1]);
    }

    #[test]
    fn central_triple_is_reproducible() {
        let spec = [CorruptionSpec::new(MaskKind::Central, 0)];
        let a = build_pseudo_sequence(&face(), 3, &spec, 9).unwrap();
        assert_eq!(a, build_pseudo_sequence(&face(), 3, &spec, 9).unwrap());
    }

    #[test]
    fn freehand_masks_are_distinct_and_sized() {
        let p = build_pseudo_sequence(&face(), 3, &[CorruptionSpec::new(MaskKind::Freehand, 0)], 2).unwrap();
        for i in 0..3 {
            let f = p.masks[i].corrupted_fraction();
            assert!((0.30..=0.50).contains(&f), "{f}");
            for j in i + 1..3 {
                assert_ne!(p.masks[i], p.masks[j]);
            }
        }
        assert!(p.frames().iter().all(|f| f == &p.source));
    }

    #[test]
    fn arity_checks() {
        let spec = CorruptionSpec::new(MaskKind::Central, 0);
        assert!(build_pseudo_sequence(&face(), 1, std::slice::from_ref(&spec), 0).is_err());
        assert!(build_pseudo_sequence(&face(), 3, &[spec.clone(), spec], 0).is_err());
    }
}
