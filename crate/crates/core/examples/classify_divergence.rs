//! Divergence scores and three-class labeling against thresholds.
//!
//! ```bash
//! cargo run --release --example classify_divergence -- [bg_threshold kl_threshold]
//! ```

use nalgebra::{DMatrix, DVector};
use qlfseg::divergence::{classify, gaussian_kl_params, ClassLabel, Thresholds};
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::{analyze, majority_labels};
use qlfseg::{gmrf::GmrfConfig, superpixel::SlicParams};

fn main() -> qlfseg::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("thresholds must be numbers"))
        .collect();
    let th = match args[..] {
        [bg, kl] => Thresholds::new(bg, kl)?,
        _ => Thresholds::default(),
    };

    // KL(N(0, 4) || N(0, 1)) = (4 - 1 - ln 4) / 2
    let kl = gaussian_kl_params(
        &DVector::from_element(1, 0.0),
        &DMatrix::from_element(1, 1, 4.0),
        &DVector::from_element(1, 0.0),
        &DMatrix::from_element(1, 1, 1.0),
    )?;
    println!("KL(N(0,4) || N(0,1)) = {kl:.6}");

    let phantom = generate(21, &PhantomParams::default());
    let a = analyze(
        &phantom.image,
        &SlicParams::default(),
        &GmrfConfig::default(),
    )?;
    let predicted = classify(&a.scores, &th);
    let truth = majority_labels(&a.map, &phantom.truth)?;

    println!("thresholds: bg {} kl {}", th.bg_threshold, th.kl_threshold);
    println!(
        "{:>10} {:>8} {:>10} {:>10}",
        "truth", "count", "median kl", "agree"
    );
    for class in ClassLabel::ALL {
        let mut kls: Vec<f64> = (0..truth.len())
            .filter(|&i| truth[i] == class)
            .map(|i| a.scores.scores[i].kl)
            .collect();
        kls.sort_by(f64::total_cmp);
        let agree = (0..truth.len())
            .filter(|&i| truth[i] == class && predicted[i] == class)
            .count();
        let median = kls.get(kls.len() / 2).copied().unwrap_or(f64::NAN);
        println!("{class:>10} {:>8} {median:>10.3} {agree:>10}", kls.len());
    }
    Ok(())
}
