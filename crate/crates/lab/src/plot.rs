//! Raster line plots and image grids.

use image::{Rgb, RgbImage};
use inpaint_core::image::Image;

use crate::files::image_to_rgb;

const PALETTE: [[u8; 3]; 6] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [23, 190, 207],
];
const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const INK: Rgb<u8> = Rgb([40, 40, 40]);

/// 3x5 glyphs, one row per nibble (bit 2 = left column).
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 7, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 1, 1],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        '.' => [0, 0, 0, 0, 2],
        '-' => [0, 0, 7, 0, 0],
        '+' => [0, 2, 7, 2, 0],
        'e' => [0, 7, 7, 4, 7],
        _ => return None,
    })
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn text(img: &mut RgbImage, x: i64, y: i64, s: &str, scale: i64) {
    for (i, ch) in s.chars().enumerate() {
        let Some(rows) = glyph(ch) else { continue };
        for (r, bits) in rows.iter().enumerate() {
            for col in 0..3 {
                if bits >> (2 - col) & 1 == 1 {
                    for dy in 0..scale {
                        for dx in 0..scale {
                            put(img, x + (i as i64 * 4 + col) * scale + dx, y + r as i64 * scale + dy, INK);
                        }
                    }
                }
            }
        }
    }
}

fn line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, c);
        put(img, x, y + 1, c);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Lines in palette order with min/max tick labels. With `log_y`,
/// non-positive values are dropped.
pub fn line_plot(series: &[Series], log_y: bool, width: u32, height: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(width, height, WHITE);
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, tf(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        return img;
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let (left, right, top, bottom) = (56i64, width as i64 - 12, 12i64, height as i64 - 28);
    let px = |x: f64| left + ((x - x0) / (x1 - x0) * (right - left) as f64).round() as i64;
    let py = |y: f64| bottom - ((y - y0) / (y1 - y0) * (bottom - top) as f64).round() as i64;
    line(&mut img, (left, top), (left, bottom), INK);
    line(&mut img, (left, bottom), (right, bottom), INK);
    let shown = |y: f64| if log_y { 10f64.powf(y) } else { y };
    text(&mut img, 2, top, &label(shown(y1)), 2);
    text(&mut img, 2, bottom - 10, &label(shown(y0)), 2);
    text(&mut img, left, bottom + 8, &label(x0), 2);
    let xl = label(x1);
    text(&mut img, right - 8 * xl.len() as i64, bottom + 8, &xl, 2);
    for (k, p) in pts.iter().enumerate() {
        let c = Rgb(PALETTE[k % PALETTE.len()]);
        for w in p.windows(2) {
            line(&mut img, (px(w[0].0), py(w[0].1)), (px(w[1].0), py(w[1].1)), c);
        }
        // legend swatch
        for dy in 0..6 {
            for dx in 0..14 {
                put(&mut img, right - 16 + dx, top + 10 * k as i64 + dy, c);
            }
        }
    }
    img
}

/// Tiles rows of equally sized images, upscaled by `scale`, on a white
/// background with `pad` pixels between cells. Short rows are left blank.
pub fn image_grid(rows: &[Vec<Image>], scale: u32, pad: u32) -> RgbImage {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0) as u32;
    let Some(first) = rows.iter().flatten().next() else {
        return RgbImage::from_pixel(1, 1, WHITE);
    };
    let (ch, cw) = (first.height() as u32 * scale, first.width() as u32 * scale);
    let w = cols * cw + (cols + 1) * pad;
    let h = rows.len() as u32 * ch + (rows.len() as u32 + 1) * pad;
    let mut out = RgbImage::from_pixel(w, h, WHITE);
    for (r, row) in rows.iter().enumerate() {
        for (c, img) in row.iter().enumerate() {
            let tile = image::imageops::resize(&image_to_rgb(img), cw, ch, image::imageops::FilterType::Nearest);
            let x = pad + c as u32 * (cw + pad);
            let y = pad + r as u32 * (ch + pad);
            image::imageops::replace(&mut out, &tile, x as i64, y as i64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_dimensions_and_placement() {
        let a = Image::filled(4, 4, 1.0);
        let b = Image::filled(4, 4, -1.0);
        let g = image_grid(&[vec![a.clone(), b.clone()], vec![b]], 2, 1);
        assert_eq!(g.dimensions(), (2 * 8 + 3, 2 * 8 + 3));
        assert_eq!(g.get_pixel(1, 1).0, [255, 255, 255]);
        assert_eq!(g.get_pixel(10, 1).0, [0, 0, 0]);
        assert_eq!(g.get_pixel(10, 10).0, [255, 255, 255]);
    }

    #[test]
    fn plot_draws_each_series() {
        let s = |name: &str, k: f64| Series {
            name: name.into(),
            points: (0..20).map(|i| (i as f64, k * (1.0 + i as f64))).collect(),
        };
        let img = line_plot(&[s("a", 1.0), s("b", 3.0)], true, 320, 200);
        for c in &PALETTE[..2] {
            assert!(img.pixels().filter(|p| p.0 == *c).count() > 20);
        }
        let empty = line_plot(&[], false, 50, 40);
        assert!(empty.pixels().all(|p| *p == WHITE));
    }
}
