//! SLIC oversegmentation of the intensity channel.
//!
//! ```bash
//! cargo run --release --example slic_superpixels -- [k] [compactness]
//! ```
//!
//! Writes `superpixels.png`, the phantom with superpixel borders in white.

use qlfseg::color::{intensity_channel, rgb_to_hsi, RgbImage};
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::superpixel::{slic_segment_with_stats, SlicParams};

fn main() -> qlfseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let k = args
        .next()
        .map_or(600, |a| a.parse().expect("k must be an integer"));
    let compactness = args
        .next()
        .map_or(10.0, |a| a.parse().expect("compactness must be a number"));

    let phantom = generate(11, &PhantomParams::default());
    let intensity = intensity_channel(&rgb_to_hsi(&phantom.image));
    let params = SlicParams {
        k,
        compactness,
        ..SlicParams::default()
    };
    let (map, stats) = slic_segment_with_stats(&intensity, &params)?;
    println!(
        "requested {k}, got {} superpixels (S = {:.2}) after {} iterations, residual {:.2e}",
        map.len(),
        map.grid_interval(),
        stats.iterations,
        stats.final_residual
    );

    let areas: Vec<usize> = map.members().iter().map(Vec::len).collect();
    let (min, max) = (areas.iter().min().unwrap(), areas.iter().max().unwrap());
    println!("superpixel areas: min {min}, max {max}");

    let (w, h) = (map.width(), map.height());
    let border = |x: usize, y: usize| {
        let l = map.label_at(x, y);
        (x + 1 < w && map.label_at(x + 1, y) != l) || (y + 1 < h && map.label_at(x, y + 1) != l)
    };
    let pixels = (0..w * h)
        .map(|p| {
            if border(p % w, p / w) {
                [255, 255, 255]
            } else {
                phantom.image.pixels()[p]
            }
        })
        .collect();
    RgbImage::new(w, h, pixels)?.save_png("superpixels.png")?;
    println!("wrote superpixels.png");
    Ok(())
}
