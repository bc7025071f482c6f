//! HSI conversion and the two channels the classifier compares.
//!
//! ```bash
//! cargo run --example hsi_channels -- [image.png] [out_dir]
//! ```
//!
//! Without an image a synthetic phantom is used. Writes `intensity.png` and
//! `green.png` as grayscale renderings.

use std::path::PathBuf;

use qlfseg::color::{
    green_channel, intensity_channel, load_image, rgb_to_hsi, RgbImage, ScalarField,
};
use qlfseg::phantom::{generate, PhantomParams};

fn gray(field: &ScalarField) -> qlfseg::Result<RgbImage> {
    let pixels = field
        .values()
        .iter()
        .map(|&v| [(v * 255.0).round() as u8; 3])
        .collect();
    RgbImage::new(field.width(), field.height(), pixels)
}

fn summary(name: &str, field: &ScalarField) {
    let v = field.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v
        .iter()
        .fold((1.0f64, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    println!("{name:>9}: mean {mean:.4}  min {lo:.4}  max {hi:.4}");
}

fn main() -> qlfseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => load_image(path)?,
        None => generate(3, &PhantomParams::default()).image,
    };
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));

    let hsi = rgb_to_hsi(&img);
    let mean_sat = hsi.s.iter().sum::<f64>() / hsi.s.len() as f64;
    println!(
        "{}x{} pixels, mean saturation {mean_sat:.4}",
        img.width(),
        img.height()
    );

    let intensity = intensity_channel(&hsi);
    let green = green_channel(&img);
    summary("intensity", &intensity);
    summary("green", &green);

    std::fs::create_dir_all(&out_dir)?;
    gray(&intensity)?.save_png(out_dir.join("intensity.png"))?;
    gray(&green)?.save_png(out_dir.join("green.png"))?;
    println!("wrote intensity.png and green.png to {}", out_dir.display());
    Ok(())
}
