//! Images and latent codes.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use rand::Rng;

use crate::error::{bail, Result};

/// An RGB image with values in `[-1, 1]`, stored planar (channel, row, column).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

pub const CHANNELS: usize = 3;

impl Image {
    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self {
            height,
            width,
            data: vec![value; CHANNELS * height * width],
        }
    }

    /// Wraps planar data of length `3 * height * width`.
    pub fn from_planar(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != CHANNELS * height * width {
            bail!(
                Dimension,
                "planar buffer of {} values for a {}x{} image",
                data.len(),
                height,
                width
            );
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds an image from interleaved `[y][x][c]` values.
    pub fn from_interleaved(height: usize, width: usize, hwc: &[f64]) -> Result<Self> {
        if hwc.len() != CHANNELS * height * width {
            bail!(
                Dimension,
                "interleaved buffer of {} values for a {}x{} image",
                hwc.len(),
                height,
                width
            );
        }
        let plane = height * width;
        let mut data = vec![0.0; hwc.len()];
        for (p, px) in hwc.chunks_exact(CHANNELS).enumerate() {
            for c in 0..CHANNELS {
                data[c * plane + p] = px[c];
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        let plane = self.plane();
        let mut out = vec![0.0; self.data.len()];
        for p in 0..plane {
            for c in 0..CHANNELS {
                out[p * CHANNELS + c] = self.data[c * plane + p];
            }
        }
        out
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn plane(&self) -> usize {
        self.height * self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn planar(&self) -> &[f64] {
        &self.data
    }

    pub fn planar_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_planar(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[c * self.plane() + y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f64) {
        let plane = self.plane();
        self.data[c * plane + y * self.width + x] = value;
    }

    pub fn is_in_range(&self) -> bool {
        self.data.iter().all(|v| (-1.0..=1.0).contains(v))
    }

    pub fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            bail!(
                Dimension,
                "image {}x{} vs {}x{}",
                self.height,
                self.width,
                other.height,
                other.width
            );
        }
        Ok(())
    }

    /// Maps `[-1, 1]` to 8-bit intensities, rounding to nearest.
    pub fn to_u8_interleaved(&self) -> Vec<u8> {
        self.to_interleaved()
            .into_iter()
            .map(|v| crate::math::round((v.clamp(-1.0, 1.0) + 1.0) * 127.5) as u8)
            .collect()
    }

    pub fn from_u8_interleaved(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        let values: Vec<f64> = bytes.iter().map(|&b| b as f64 / 127.5 - 1.0).collect();
        Self::from_interleaved(height, width, &values)
    }
}

/// A latent code fed to the generator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct LatentVector(pub Vec<f64>);

impl LatentVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Draws from the uniform prior `U[-1, 1]^dim`.
    pub fn sample_prior<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn squared_distance(&self, other: &LatentVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl Deref for LatentVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LatentVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for LatentVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
