//! JSON, CSV and PNG helpers with path-carrying errors.

use std::fs;
use std::path::Path;

use inpaint_core::image::Image;
use inpaint_core::mask::{Mask, MaskKind};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{csv_err, image_err, io_err, json_err, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => ensure_dir(p),
        _ => Ok(()),
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(json_err(path))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes a header-only file when `rows` is empty.
pub fn write_csv_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

pub fn image_to_rgb(img: &Image) -> image::RgbImage {
    image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.to_u8_interleaved())
        .expect("buffer length matches dimensions")
}

pub fn rgb_to_image(rgb: &image::RgbImage) -> Image {
    Image::from_u8_interleaved(rgb.height() as usize, rgb.width() as usize, rgb.as_raw())
        .expect("buffer length matches dimensions")
}

pub fn save_png(path: &Path, img: &Image) -> Result<()> {
    save_rgb(path, &image_to_rgb(img))
}

pub fn save_rgb(path: &Path, rgb: &image::RgbImage) -> Result<()> {
    ensure_parent(path)?;
    rgb.save_with_format(path, image::ImageFormat::Png).map_err(image_err(path))
}

/// Decodes any supported file as-is, without resizing.
pub fn load_rgb(path: &Path) -> Result<image::RgbImage> {
    Ok(image::open(path).map_err(image_err(path))?.to_rgb8())
}

pub fn load_png(path: &Path) -> Result<Image> {
    Ok(rgb_to_image(&load_rgb(path)?))
}

/// Grayscale PNG with 255 for observed and 0 for corrupted pixels.
pub fn save_mask(path: &Path, mask: &Mask) -> Result<()> {
    let (h, w) = mask.dims();
    let px: Vec<u8> = mask.bits().iter().map(|&b| if b == 1 { 255 } else { 0 }).collect();
    let gray = image::GrayImage::from_raw(w as u32, h as u32, px).expect("mask buffer");
    ensure_parent(path)?;
    gray.save_with_format(path, image::ImageFormat::Png).map_err(image_err(path))
}

/// Pixels at or above 128 are observed.
pub fn load_mask(path: &Path, kind: MaskKind) -> Result<Mask> {
    let gray = image::open(path).map_err(image_err(path))?.to_luma8();
    let bits = gray.as_raw().iter().map(|&v| u8::from(v >= 128)).collect();
    Ok(Mask::from_bits_unchecked(gray.height() as usize, gray.width() as usize, bits, kind)?)
}
