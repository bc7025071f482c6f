//! Batch mode over a directory of images, as for a full jaw set.
//!
//! ```bash
//! cargo run --release --example batch_jaw_set -- [n_images]
//! ```
//!
//! Generates phantoms (plus one corrupt file) in `jaw_set/`, then runs
//! batch segmentation into `jaw_set_out/`.

use std::path::Path;

use qlfseg::cli::{cmd_batch, RunConfig};
use qlfseg::phantom::{corpus, PhantomParams};
use qlfseg::pipeline::PipelineConfig;

fn main() -> qlfseg::Result<()> {
    let n = std::env::args()
        .nth(1)
        .map_or(14, |a| a.parse().expect("count must be an integer"));
    let input = Path::new("jaw_set");
    std::fs::create_dir_all(input)?;
    let mut truth = Vec::new();
    for p in corpus(300, n, &PhantomParams::default()) {
        let name = format!("tooth_{:02}.png", p.seed - 300);
        p.image.save_png(input.join(&name))?;
        truth.push((name, p.coverage));
    }
    std::fs::write(input.join("broken.png"), b"not a png")?;

    let cfg = RunConfig::new(PipelineConfig::default(), "jaw_set_out");
    let summary = cmd_batch(&cfg, input)?;
    for e in &summary.images {
        let gt = truth.iter().find(|(n, _)| *n == e.image).map(|t| t.1);
        println!(
            "{:<14} bqi {:.4}  truth {:.4}",
            e.image,
            e.bqi,
            gt.unwrap_or(f64::NAN)
        );
    }
    for f in &summary.failures {
        println!("{:<14} failed: {}", f.image, f.error);
    }
    println!("summary written to jaw_set_out/batch_summary.json");
    Ok(())
}
