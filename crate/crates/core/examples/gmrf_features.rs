//! Per-superpixel Gaussian field estimates in both channels.
//!
//! ```bash
//! cargo run --release --example gmrf_features
//! ```
//!
//! Prints the fitted mean and the center-pixel variance / neighbor
//! covariances for one superpixel of each ground-truth class.

use qlfseg::color::{green_channel, intensity_channel, rgb_to_hsi};
use qlfseg::divergence::ClassLabel;
use qlfseg::gmrf::{estimate_all, Channel, GmrfConfig, GmrfFeature};
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::majority_labels;
use qlfseg::superpixel::{slic_segment, SlicParams};

fn show(name: &str, f: &GmrfFeature) {
    let m: Vec<String> = f.mean.iter().map(|v| format!("{v:.3}")).collect();
    let c = &f.covariance;
    println!(
        "  {name:>9}: n={:4} mean [{}] var {:.2e} cov(center, right) {:.2e}",
        f.n_samples,
        m.join(" "),
        c[(0, 0)],
        c[(0, 1)]
    );
}

fn main() -> qlfseg::Result<()> {
    let phantom = generate(5, &PhantomParams::default());
    let intensity = intensity_channel(&rgb_to_hsi(&phantom.image));
    let green = green_channel(&phantom.image);
    let map = slic_segment(&intensity, &SlicParams::default())?;

    let cfg = GmrfConfig::default();
    let fi = estimate_all(&intensity, &map, &cfg, Channel::Intensity)?;
    let fg = estimate_all(&green, &map, &cfg, Channel::Green)?;
    let truth = majority_labels(&map, &phantom.truth)?;

    for class in ClassLabel::ALL {
        let Some(sp) = truth.iter().position(|&l| l == class) else {
            continue;
        };
        println!("superpixel {sp} ({class}):");
        show("intensity", &fi.features[sp]);
        show("green", &fg.features[sp]);
    }
    let degenerate = fi.features.iter().filter(|f| f.is_degenerate()).count();
    println!("{} superpixels, {degenerate} degenerate", map.len());
    Ok(())
}
