//! Calibrate thresholds on synthetic phantoms and measure held-out accuracy.
//!
//! ```bash
//! cargo run --release -p qlfseg --example phantom_study -- 10 40
//! ```

use std::time::Instant;

use qlfseg::divergence::{calibrate_thresholds, classify};
use qlfseg::phantom::{corpus, PhantomParams};
use qlfseg::pipeline::analyze;
use qlfseg::quant::{compute_bqi, superpixel_areas};
use qlfseg::{gmrf::GmrfConfig, superpixel::SlicParams};

fn main() -> qlfseg::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("count"));
    let n_train = args.next().unwrap_or(10);
    let n_test = args.next().unwrap_or(40);

    let params = PhantomParams::default();
    let slic = SlicParams::default();
    let gmrf = GmrfConfig::default();

    let mut training = Vec::new();
    for p in corpus(0, n_train, &params) {
        training.extend(analyze(&p.image, &slic, &gmrf)?.training_examples(&p.truth)?);
    }
    let th = calibrate_thresholds(&training)?;
    println!(
        "calibrated on {n_train} phantoms: bg_threshold={} kl_threshold={}",
        th.bg_threshold, th.kl_threshold
    );

    let (mut worst_acc, mut worst_err, mut slowest) = (1.0f64, 0.0f64, 0.0f64);
    for p in corpus(1000, n_test, &params) {
        let start = Instant::now();
        let a = analyze(&p.image, &slic, &gmrf)?;
        let labels = classify(&a.scores, &th);
        let bqi = compute_bqi(&labels, &superpixel_areas(&a.map))?.bqi;
        let secs = start.elapsed().as_secs_f64();
        let pixels: Vec<_> = a.map.labels().iter().map(|&l| labels[l as usize]).collect();
        let acc = p.pixel_accuracy(&pixels);
        println!(
            "seed {:4}  truth {:.3}  bqi {:.3}  accuracy {:.4}  {:.2}s",
            p.seed, p.coverage, bqi, acc, secs
        );
        worst_acc = worst_acc.min(acc);
        worst_err = worst_err.max((bqi - p.coverage).abs());
        slowest = slowest.max(secs);
    }
    println!(
        "worst accuracy {worst_acc:.4}, worst |bqi - truth| {worst_err:.4}, slowest {slowest:.2}s"
    );
    Ok(())
}
