//! Corruption masks: `1` marks an observed pixel, `0` a pixel to inpaint.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{bail, Error, Result};
use crate::image::{Image, CHANNELS};
use crate::math;
use crate::rng;

/// Value written into corrupted pixels by [`apply_mask`].
pub const FILL_VALUE: f64 = 0.0;

pub const CENTRAL_RANGE: (f64, f64) = (0.40, 0.70);
pub const FREEHAND_RANGE: (f64, f64) = (0.30, 0.50);
pub const FREEHAND_DEFAULT: f64 = 0.40;
/// Allowed deviation of the corrupted fraction from the request.
pub const FRACTION_TOLERANCE: f64 = 0.02;
pub const CHECKERBOARD_SIZES: [usize; 3] = [8, 16, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MaskKind {
    Central,
    Checkerboard,
    Freehand,
    HalfLeft,
    HalfRight,
    HalfTop,
    HalfBottom,
}

impl MaskKind {
    pub const ALL: [MaskKind; 7] = [
        MaskKind::Central,
        MaskKind::Checkerboard,
        MaskKind::Freehand,
        MaskKind::HalfLeft,
        MaskKind::HalfRight,
        MaskKind::HalfTop,
        MaskKind::HalfBottom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaskKind::Central => "central",
            MaskKind::Checkerboard => "checkerboard",
            MaskKind::Freehand => "freehand",
            MaskKind::HalfLeft => "half_left",
            MaskKind::HalfRight => "half_right",
            MaskKind::HalfTop => "half_top",
            MaskKind::HalfBottom => "half_bottom",
        }
    }

    pub fn is_half(self) -> bool {
        matches!(
            self,
            MaskKind::HalfLeft | MaskKind::HalfRight | MaskKind::HalfTop | MaskKind::HalfBottom
        )
    }
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Spec(alloc::format!("unknown mask kind {s:?}")))
    }
}

/// Brush parameters for freehand masks, as fractions of the image height.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrokeParams {
    pub strokes: (usize, usize),
    pub width: (f64, f64),
    pub step: (f64, f64),
}

impl Default for StrokeParams {
    fn default() -> Self {
        Self {
            strokes: (3, 8),
            width: (1.0 / 16.0, 1.0 / 6.0),
            step: (1.0 / 8.0, 1.0 / 3.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorruptionSpec {
    pub kind: MaskKind,
    /// Corrupted fraction for central and freehand masks. `None` draws a
    /// central fraction uniformly from [`CENTRAL_RANGE`] and uses
    /// [`FREEHAND_DEFAULT`] for freehand.
    pub fraction: Option<f64>,
    pub block_sizes: Vec<usize>,
    pub stroke: StrokeParams,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(kind: MaskKind, seed: u64) -> Self {
        Self {
            kind,
            fraction: None,
            block_sizes: CHECKERBOARD_SIZES.to_vec(),
            stroke: StrokeParams::default(),
            seed,
        }
    }

    pub fn with_fraction(mut self, fraction: f64) -> Self {
        self.fraction = Some(fraction);
        self
    }

    pub fn with_block_sizes(mut self, sizes: &[usize]) -> Self {
        self.block_sizes = sizes.to_vec();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |f: f64, (lo, hi): (f64, f64)| f >= lo - 1e-12 && f <= hi + 1e-12;
        match self.kind {
            MaskKind::Central => {
                if let Some(f) = self.fraction {
                    if !in_range(f, CENTRAL_RANGE) {
                        bail!(Spec, "central fraction {f} outside [0.40, 0.70]");
                    }
                }
            }
            MaskKind::Freehand => {
                let f = self.fraction.unwrap_or(FREEHAND_DEFAULT);
                if !in_range(f, FREEHAND_RANGE) {
                    bail!(Spec, "freehand fraction {f} outside [0.30, 0.50]");
                }
                let s = self.stroke;
                if s.strokes.0 == 0 || s.strokes.0 > s.strokes.1 {
                    bail!(Spec, "stroke count range {:?}", s.strokes);
                }
                if !(s.width.0 > 0.0 && s.width.0 <= s.width.1 && s.step.0 > 0.0 && s.step.0 <= s.step.1) {
                    bail!(Spec, "stroke width/step ranges must be positive and ordered");
                }
            }
            MaskKind::Checkerboard if self.block_sizes.is_empty() || self.block_sizes.contains(&0) => {
                bail!(Spec, "checkerboard needs positive block sizes");
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    bits: Vec<u8>,
    kind: MaskKind,
}

impl Mask {
    /// Builds a mask from row-major 0/1 bits, enforcing that some pixels are
    /// observed and some are corrupted.
    pub fn from_bits(height: usize, width: usize, bits: Vec<u8>, kind: MaskKind) -> Result<Self> {
        let m = Self::from_bits_unchecked(height, width, bits, kind)?;
        let zeros = m.corrupted_count();
        if zeros == 0 {
            bail!(Spec, "mask corrupts no pixels");
        }
        if zeros == m.bits.len() {
            bail!(Spec, "mask corrupts every pixel");
        }
        Ok(m)
    }

    /// Like [`Mask::from_bits`] but admits all-ones and all-zeros masks.
    pub fn from_bits_unchecked(height: usize, width: usize, bits: Vec<u8>, kind: MaskKind) -> Result<Self> {
        if bits.len() != height * width {
            bail!(Dimension, "{} mask bits for {height}x{width}", bits.len());
        }
        if bits.iter().any(|&b| b > 1) {
            bail!(Spec, "mask bits must be 0 or 1");
        }
        Ok(Self {
            height,
            width,
            bits,
            kind,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn is_observed(&self, p: usize) -> bool {
        self.bits[p] == 1
    }

    pub fn corrupted_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 0).count()
    }

    pub fn corrupted_fraction(&self) -> f64 {
        self.corrupted_count() as f64 / self.bits.len() as f64
    }

    pub fn ensure_matches(&self, image: &Image) -> Result<()> {
        if self.dims() != image.dims() {
            bail!(
                Dimension,
                "mask {}x{} vs image {}x{}",
                self.height,
                self.width,
                image.height(),
                image.width()
            );
        }
        Ok(())
    }
}

pub fn make_mask(spec: &CorruptionSpec, resolution: (usize, usize)) -> Result<Mask> {
    spec.validate()?;
    let (h, w) = resolution;
    if h < 16 || w < 16 {
        bail!(Spec, "resolution {h}x{w} below 16x16");
    }
    let mut r = rng::seeded(spec.seed);
    let bits = match spec.kind {
        MaskKind::Central => {
            let f = spec
                .fraction
                .unwrap_or_else(|| r.random_range(CENTRAL_RANGE.0..=CENTRAL_RANGE.1));
            central(h, w, f)
        }
        MaskKind::Checkerboard => {
            // A block must leave room for a second one along some axis.
            let fits: Vec<usize> = spec.block_sizes.iter().copied().filter(|&b| b < h.max(w)).collect();
            if fits.is_empty() {
                bail!(Spec, "checkerboard blocks {:?} do not tile a {h}x{w} image", spec.block_sizes);
            }
            let block = fits[r.random_range(0..fits.len())];
            let parity = r.random_range(0..2usize);
            let mut bits = vec![1u8; h * w];
            for y in 0..h {
                for x in 0..w {
                    if (y / block + x / block) % 2 == parity {
                        bits[y * w + x] = 0;
                    }
                }
            }
            bits
        }
        MaskKind::Freehand => freehand(h, w, spec.fraction.unwrap_or(FREEHAND_DEFAULT), &spec.stroke, &mut r)?,
        MaskKind::HalfLeft | MaskKind::HalfRight | MaskKind::HalfTop | MaskKind::HalfBottom => {
            let mut bits = vec![1u8; h * w];
            for y in 0..h {
                for x in 0..w {
                    let hit = match spec.kind {
                        MaskKind::HalfLeft => x < w / 2,
                        MaskKind::HalfRight => x >= w - w / 2,
                        MaskKind::HalfTop => y < h / 2,
                        _ => y >= h - h / 2,
                    };
                    if hit {
                        bits[y * w + x] = 0;
                    }
                }
            }
            bits
        }
    };
    Mask::from_bits(h, w, bits, spec.kind)
}

/// Centered block of zeros. A square of side `round(√(f·H·W))` is used when
/// its area is within tolerance of the request; otherwise the width is
/// re-rounded against the chosen height.
fn central(h: usize, w: usize, f: f64) -> Vec<u8> {
    let target = f * (h * w) as f64;
    let side = (math::round(math::sqrt(target)) as usize).clamp(1, h.min(w));
    let tolerance = FRACTION_TOLERANCE * (h * w) as f64;
    let (bh, bw) = if math::abs((side * side) as f64 - target) <= tolerance {
        (side, side)
    } else {
        (side, (math::round(target / side as f64) as usize).clamp(1, w))
    };
    let (top, left) = ((h - bh) / 2, (w - bw) / 2);
    let mut bits = vec![1u8; h * w];
    for y in top..top + bh {
        bits[y * w + left..y * w + left + bw].fill(0);
    }
    bits
}

/// Random-walk brush strokes grown one stamp at a time until the corrupted
/// fraction enters `fraction ± FRACTION_TOLERANCE`. Each new stroke starts
/// on an already corrupted pixel, so the damaged region is 4-connected.
fn freehand(h: usize, w: usize, fraction: f64, p: &StrokeParams, r: &mut rng::Rng) -> Result<Vec<u8>> {
    let total = (h * w) as f64;
    let lo = (fraction - FRACTION_TOLERANCE).max(FREEHAND_RANGE.0) * total;
    let hi = (fraction + FRACTION_TOLERANCE).min(FREEHAND_RANGE.1) * total;
    let scale = h.min(w) as f64;
    for _attempt in 0..64 {
        let mut bits = vec![1u8; h * w];
        let mut zeros = 0usize;
        let strokes = r.random_range(p.strokes.0..=p.strokes.1);
        let mut stroke = 0;
        let (mut cy, mut cx) = (
            r.random_range(0.25..0.75) * h as f64,
            r.random_range(0.25..0.75) * w as f64,
        );
        'grow: loop {
            let radius = r.random_range(p.width.0..=p.width.1) * scale / 2.0;
            let segments = r.random_range(2..=5);
            for _ in 0..segments {
                let heading = r.random_range(0.0..core::f64::consts::TAU);
                let length = r.random_range(p.step.0..=p.step.1) * scale;
                let (dy, dx) = (math::sin(heading), math::cos(heading));
                let mut t = 0.0;
                while t <= length {
                    let y = (cy + dy * t).clamp(0.0, h as f64 - 1.0);
                    let x = (cx + dx * t).clamp(0.0, w as f64 - 1.0);
                    zeros += stamp(&mut bits, h, w, y, x, radius);
                    if zeros as f64 >= lo {
                        break 'grow;
                    }
                    t += 1.0;
                }
                cy = (cy + dy * length).clamp(0.0, h as f64 - 1.0);
                cx = (cx + dx * length).clamp(0.0, w as f64 - 1.0);
            }
            stroke += 1;
            if stroke < strokes {
                // Next stroke starts on a random corrupted pixel.
                let pick = r.random_range(0..zeros);
                let p0 = bits.iter().enumerate().filter(|(_, &b)| b == 0).nth(pick).unwrap().0;
                cy = (p0 / w) as f64;
                cx = (p0 % w) as f64;
            }
        }
        if zeros as f64 <= hi {
            return Ok(bits);
        }
    }
    bail!(Spec, "could not synthesize a freehand mask near fraction {fraction}")
}

/// Clears a rasterized disc; returns how many pixels changed.
fn stamp(bits: &mut [u8], h: usize, w: usize, cy: f64, cx: f64, radius: f64) -> usize {
    let r = radius.max(1.0);
    let (yc, xc) = (math::round(cy) as isize, math::round(cx) as isize);
    let ri = math::floor(r) as isize;
    let mut changed = 0;
    for y in (yc - ri).max(0)..=(yc + ri).min(h as isize - 1) {
        for x in (xc - ri).max(0)..=(xc + ri).min(w as isize - 1) {
            let (dy, dx) = ((y - yc) as f64, (x - xc) as f64);
            if dy * dy + dx * dx <= r * r {
                let b = &mut bits[y as usize * w + x as usize];
                if *b == 1 {
                    *b = 0;
                    changed += 1;
                }
            }
        }
    }
    changed
}

/// Keeps observed pixels and writes [`FILL_VALUE`] into corrupted ones.
pub fn apply_mask(image: &Image, mask: &Mask) -> Result<Image> {
    mask.ensure_matches(image)?;
    let mut out = image.clone();
    let plane = image.plane();
    let data = out.planar_mut();
    for c in 0..CHANNELS {
        for p in 0..plane {
            if !mask.is_observed(p) {
                data[c * plane + p] = FILL_VALUE;
            }
        }
    }
    Ok(out)
}

/// Counts 4-connected components of corrupted pixels.
pub fn corrupted_components(mask: &Mask) -> usize {
    let (h, w) = mask.dims();
    let mut seen = vec![false; h * w];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..h * w {
        if mask.bits[start] != 0 || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (y, x) = (p / w, p % w);
            let mut visit = |q: usize| {
                if mask.bits[q] == 0 && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
        }
    }
    count
}
