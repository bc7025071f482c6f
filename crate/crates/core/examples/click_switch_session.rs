//! Correcting an automatic segmentation with click-switch edits and undo.
//!
//! ```bash
//! cargo run --release --example click_switch_session
//! ```

use qlfseg::divergence::{ClassLabel, Thresholds};
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::{majority_labels, segment, PipelineConfig};
use qlfseg::session::Session;

fn main() -> qlfseg::Result<()> {
    let phantom = generate(7, &PhantomParams::default());
    // Deliberately loose divergence cut so there is something to fix.
    let cfg = PipelineConfig {
        thresholds: Thresholds::new(Thresholds::default().bg_threshold, 25.0)?,
        ..PipelineConfig::default()
    };
    let result = segment(&phantom.image, &cfg, "phantom_7")?;
    let truth = majority_labels(&result.map, &phantom.truth)?;
    let mut session = Session::new(result)?;
    println!(
        "session {}: automatic bqi {:.4}, truth {:.4}",
        session.id(),
        session.bqi(),
        phantom.coverage
    );

    // A grader clicks each wrong superpixel until its color is right.
    let wrong: Vec<usize> = (0..truth.len())
        .filter(|&sp| session.labels()[sp] != truth[sp])
        .collect();
    println!("{} superpixels disagree with the expert", wrong.len());
    for &sp in &wrong {
        let c = session.result().map.centers()[sp];
        let (x, y) = (c.x as i64, c.y as i64);
        let hit = session.locate_superpixel(x, y)?;
        if hit != sp {
            // Center falls outside a non-convex superpixel: set it directly.
            session.set_label(sp, truth[sp])?;
            continue;
        }
        while session.labels()[sp] != truth[sp] {
            session.toggle_label(x, y)?;
        }
    }
    println!(
        "after {} edits: bqi {:.4}",
        session.revision(),
        session.bqi()
    );

    let last = session.undo()?;
    println!(
        "undo superpixel {} ({} -> {}): revision {}, bqi {:.4}",
        last.superpixel,
        last.new_label,
        last.old_label,
        session.revision(),
        session.bqi()
    );

    let (label_img, report) = session.export_result();
    let biofilm_px = label_img
        .pixels()
        .iter()
        .filter(|&&p| p == qlfseg::render::palette(ClassLabel::Biofilm))
        .count();
    println!(
        "export: revision {}, {} biofilm pixels",
        report.revision, biofilm_px
    );
    Ok(())
}
