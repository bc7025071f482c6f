//! Raster loading and the RGB -> HSI / green-channel projections.
//!
//! Everything downstream works on [`ScalarField`]s normalized to `[0, 1]`,
//! so thresholds do not depend on bit depth.

use std::io::Cursor;
use std::path::Path;

use image::ImageFormat;

use crate::error::{Error, Result};

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Parameter(format!(
                "pixel buffer has {} entries, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// Encodes the raster as an 8-bit RGB PNG.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let buf = image::RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .ok_or_else(|| Error::Internal("raster buffer size mismatch".into()))?;
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Internal(format!("png encoding failed: {e}")))?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png()?)?;
        Ok(())
    }
}

/// Hue (degrees), saturation and intensity planes.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiImage {
    pub width: usize,
    pub height: usize,
    pub h: Vec<f64>,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
}

/// A single-channel field with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::Parameter(format!(
                "field of {} values does not fit {width}x{height}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(format!("field value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a field by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let values = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Decodes a PNG or JPEG file into 8-bit RGB, dropping any alpha channel.
///
/// The format is sniffed from the file contents, not the extension.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::input(path, e))?;
    let format = match image::guess_format(&bytes) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Jpeg)) => f,
        _ => return Err(Error::UnsupportedFormat(path.to_path_buf())),
    };
    let decoded =
        image::load_from_memory_with_format(&bytes, format).map_err(|e| Error::input(path, e))?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::input(path, "image has zero width or height"));
    }
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RgbImage::new(w, h, pixels).map_err(|e| Error::input(path, e))
}

/// Geometric (arccos) HSI conversion of a single pixel.
///
/// Returns `(h, s, i)` with `h` in degrees. Achromatic pixels get `h = 0`.
pub fn pixel_to_hsi([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let sum = rf + gf + bf;
    let i = sum / 765.0;
    if r == g && g == b {
        return (0.0, 0.0, i);
    }
    let min = rf.min(gf).min(bf);
    let s = 1.0 - 3.0 * min / sum;

    let num = 0.5 * ((rf - gf) + (rf - bf));
    let den = ((rf - gf) * (rf - gf) + (rf - bf) * (gf - bf)).sqrt();
    let theta = (num / den).clamp(-1.0, 1.0).acos().to_degrees();
    let mut h = if bf <= gf { theta } else { 360.0 - theta };
    if h >= 360.0 {
        h -= 360.0;
    }
    (h, s, i)
}

pub fn rgb_to_hsi(img: &RgbImage) -> HsiImage {
    let n = img.pixels.len();
    let (mut h, mut s, mut i) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for &px in &img.pixels {
        let (ph, ps, pi) = pixel_to_hsi(px);
        h.push(ph);
        s.push(ps);
        i.push(pi);
    }
    HsiImage {
        width: img.width,
        height: img.height,
        h,
        s,
        i,
    }
}

pub fn green_channel(img: &RgbImage) -> ScalarField {
    ScalarField {
        width: img.width,
        height: img.height,
        values: img.pixels.iter().map(|p| p[1] as f64 / 255.0).collect(),
    }
}

pub fn intensity_channel(img: &HsiImage) -> ScalarField {
    ScalarField {
        width: img.width,
        height: img.height,
        values: img.i.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn px(rgb: [u8; 3]) -> RgbImage {
        RgbImage::new(1, 1, vec![rgb]).unwrap()
    }

    #[test]
    fn black_is_achromatic_zero() {
        assert_eq!(pixel_to_hsi([0, 0, 0]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gray_has_zero_saturation() {
        let (h, s, i) = pixel_to_hsi([100, 100, 100]);
        assert_eq!(h, 0.0);
        assert_eq!(s, 0.0);
        assert!((i - 100.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn pure_red() {
        // arccos(0.5 * 510 / sqrt(255^2)) = arccos(1) = 0
        let (h, s, i) = pixel_to_hsi([255, 0, 0]);
        assert!(h.abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
        assert!((i - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn primary_hues() {
        let (h, _, _) = pixel_to_hsi([0, 255, 0]);
        assert!((h - 120.0).abs() < 1e-9);
        let (h, _, _) = pixel_to_hsi([0, 0, 255]);
        assert!((h - 240.0).abs() < 1e-9);
    }

    #[test]
    fn green_channel_values() {
        assert_eq!(green_channel(&px([0, 255, 0])).values(), &[1.0]);
        assert_eq!(green_channel(&px([0, 0, 0])).values(), &[0.0]);
        let g = green_channel(&px([10, 128, 200])).values()[0];
        assert!((g - 0.50196).abs() < 1e-5);
    }

    #[test]
    fn intensity_projection() {
        let hsi = HsiImage {
            width: 2,
            height: 1,
            h: vec![0.0; 2],
            s: vec![0.0; 2],
            i: vec![0.5; 2],
        };
        assert_eq!(intensity_channel(&hsi).values(), &[0.5, 0.5]);
        let black = RgbImage::filled(3, 2, [0, 0, 0]).unwrap();
        assert!(intensity_channel(&rgb_to_hsi(&black))
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(RgbImage::new(0, 3, vec![]).is_err());
        assert!(RgbImage::new(2, 2, vec![[0, 0, 0]; 3]).is_err());
        assert!(ScalarField::new(1, 1, vec![1.5]).is_err());
    }

    #[test]
    fn load_png_drops_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        image::RgbaImage::from_raw(1, 1, vec![255, 0, 0, 7])
            .unwrap()
            .save(&path)
            .unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img, px([255, 0, 0]));
    }

    #[test]
    fn load_jpeg_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.jpg");
        image::RgbImage::from_pixel(640, 480, image::Rgb([30, 160, 40]))
            .save(&path)
            .unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!((img.width(), img.height()), (640, 480));
    }

    #[test]
    fn load_text_file_is_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("notes.png");
        std::fs::write(&path, "definitely not an image\n").unwrap();
        assert!(matches!(
            load_image(&path),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn load_missing_names_path() {
        let err = load_image("/nonexistent/x.png").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.png"));
    }

    #[test]
    fn png_round_trip() {
        let img = RgbImage::new(2, 1, vec![[1, 2, 3], [250, 128, 0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.png");
        img.save_png(&path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    proptest! {
        #[test]
        fn hsi_ranges_and_intensity(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let (h, s, i) = pixel_to_hsi([r, g, b]);
            prop_assert!((0.0..360.0).contains(&h));
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((i - (r as f64 + g as f64 + b as f64) / 765.0).abs() < 1e-9);
            if r == g && g == b {
                prop_assert_eq!(s, 0.0);
            }
        }
    }
}
