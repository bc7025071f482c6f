//! Palette label images, overlays and id-encoded label maps.

use crate::color::RgbImage;
use crate::divergence::ClassLabel;
use crate::error::{Error, Result};
use crate::superpixel::SuperpixelMap;

/// Largest superpixel count representable in a 24-bit label map.
pub const MAX_ENCODABLE_SUPERPIXELS: usize = (1 << 24) - 1;

pub fn palette(label: ClassLabel) -> [u8; 3] {
    match label {
        ClassLabel::Background => [0x00, 0x00, 0x00],
        ClassLabel::Tooth => [0x00, 0xFF, 0x00],
        ClassLabel::Biofilm => [0xFF, 0x00, 0x00],
    }
}

pub fn label_from_color(rgb: [u8; 3]) -> Option<ClassLabel> {
    ClassLabel::ALL.into_iter().find(|&l| palette(l) == rgb)
}

fn per_pixel(map: &SuperpixelMap, f: impl Fn(usize, u32) -> [u8; 3]) -> RgbImage {
    let pixels = map
        .labels()
        .iter()
        .enumerate()
        .map(|(p, &l)| f(p, l))
        .collect();
    RgbImage::new(map.width(), map.height(), pixels).expect("map dimensions are valid")
}

/// Paints every pixel with the palette color of its superpixel's class.
pub fn render_labels(map: &SuperpixelMap, labels: &[ClassLabel]) -> RgbImage {
    per_pixel(map, |_, l| palette(labels[l as usize]))
}

/// Source image blended 50/50 with the class palette.
pub fn render_overlay(source: &RgbImage, map: &SuperpixelMap, labels: &[ClassLabel]) -> RgbImage {
    per_pixel(map, |p, l| {
        let a = source.pixels()[p];
        let b = palette(labels[l as usize]);
        [0, 1, 2].map(|c| (a[c] as u16 + b[c] as u16).div_ceil(2) as u8)
    })
}

/// Superpixel ids encoded as `id = R * 65536 + G * 256 + B`.
pub fn render_label_map(map: &SuperpixelMap) -> Result<RgbImage> {
    if map.len() > MAX_ENCODABLE_SUPERPIXELS {
        return Err(Error::Parameter(format!(
            "{} superpixels exceed the 24-bit label map",
            map.len()
        )));
    }
    Ok(per_pixel(map, |_, l| {
        [(l >> 16) as u8, (l >> 8) as u8, l as u8]
    }))
}

pub fn decode_label_id(rgb: [u8; 3]) -> u32 {
    (rgb[0] as u32) << 16 | (rgb[1] as u32) << 8 | rgb[2] as u32
}

/// Reads a palette image back into per-pixel classes. Any color outside the
/// palette is an error.
pub fn decode_truth(img: &RgbImage) -> Result<Vec<ClassLabel>> {
    img.pixels()
        .iter()
        .enumerate()
        .map(|(p, &rgb)| {
            label_from_color(rgb).ok_or_else(|| {
                Error::Parameter(format!(
                    "pixel ({}, {}) has color {rgb:?}, not a palette class",
                    p % img.width(),
                    p / img.width()
                ))
            })
        })
        .collect()
}
