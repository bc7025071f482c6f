//! Longitudinal BQI per subject from a CSV manifest.
//!
//! ```bash
//! cargo run --release --example longitudinal_series
//! ```
//!
//! Two subjects with three visits each; biofilm coverage grows for one and
//! shrinks for the other.

use std::fmt::Write as _;
use std::path::Path;

use qlfseg::cli::{cmd_longitudinal, RunConfig};
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::PipelineConfig;

fn main() -> qlfseg::Result<()> {
    let dir = Path::new("longitudinal");
    std::fs::create_dir_all(dir)?;
    let visits = ["2024-01-15", "2024-04-15", "2024-07-15"];
    let plans = [
        ("patient-a", [0.10, 0.20, 0.30]),
        ("patient-b", [0.40, 0.25, 0.10]),
    ];

    let mut csv = String::from("subject_id,timestamp,image_path\n");
    let mut seed = 500;
    // Rows deliberately out of order; the summary sorts them.
    for visit in (0..visits.len()).rev() {
        for (subject, coverage) in &plans {
            let params = PhantomParams {
                target_coverage: Some(coverage[visit]),
                ..PhantomParams::default()
            };
            let name = format!("{subject}_{visit}.png");
            generate(seed, &params).image.save_png(dir.join(&name))?;
            seed += 1;
            writeln!(csv, "{subject},{},{name}", visits[visit]).unwrap();
        }
    }
    let manifest = dir.join("manifest.csv");
    std::fs::write(&manifest, csv)?;

    let cfg = RunConfig::new(PipelineConfig::default(), dir);
    let doc = cmd_longitudinal(&cfg, &manifest, &dir.join("longitudinal.json"))?;
    for s in &doc.subjects {
        println!("{} (mean bqi {:.4})", s.subject_id, s.mean_bqi);
        for p in &s.series {
            println!(
                "  {}  {:.4}  {}",
                p.timestamp.format("%Y-%m-%d"),
                p.bqi,
                p.image
            );
        }
    }
    Ok(())
}
