//! End-to-end segmentation and BQI of one phantom, compared to its truth.
//!
//! ```bash
//! cargo run --release --example quantify_phantom -- [seed] [coverage]
//! ```
//!
//! Writes the phantom, its truth image and the `segment` outputs to
//! `phantom_out/`.

use std::path::Path;

use qlfseg::cli::{cmd_segment, RunConfig};
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::PipelineConfig;

fn main() -> qlfseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args
        .next()
        .map_or(42, |a| a.parse().expect("seed must be an integer"));
    let coverage = args
        .next()
        .map(|a| a.parse::<f64>().expect("coverage must be a number"));

    let params = PhantomParams {
        target_coverage: coverage,
        ..PhantomParams::default()
    };
    let phantom = generate(seed, &params);
    let dir = Path::new("phantom_out");
    std::fs::create_dir_all(dir)?;
    let input = dir.join(format!("phantom_{seed}.png"));
    phantom.image.save_png(&input)?;
    phantom
        .truth_image()
        .save_png(dir.join(format!("phantom_{seed}_truth.png")))?;

    let cfg = RunConfig::new(PipelineConfig::default(), dir);
    let out = cmd_segment(&cfg, &input)?;
    let r = &out.report;
    println!("ground-truth coverage {:.4}", phantom.coverage);
    println!(
        "measured bqi          {:.4}  (error {:+.4})",
        r.bqi,
        r.bqi - phantom.coverage
    );
    println!(
        "areas: background {} tooth {} biofilm {} over {} superpixels",
        r.areas.background, r.areas.tooth, r.areas.biofilm, r.k_actual
    );
    println!("label image {}", out.paths.labels.display());
    println!("report      {}", out.paths.report.display());
    Ok(())
}
