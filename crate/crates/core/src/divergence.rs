//! Channel divergence scoring and three-class superpixel labeling.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::color::ScalarField;
use crate::error::{Error, Result};
use crate::gmrf::{ChannelFeatureSet, GmrfFeature};
use crate::superpixel::SuperpixelMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Background,
    Tooth,
    Biofilm,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [
        ClassLabel::Background,
        ClassLabel::Tooth,
        ClassLabel::Biofilm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Background => "background",
            ClassLabel::Tooth => "tooth",
            ClassLabel::Biofilm => "biofilm",
        }
    }

    /// Click-switch cycle: tooth -> biofilm -> background -> tooth.
    pub fn next_in_cycle(self) -> Self {
        match self {
            ClassLabel::Tooth => ClassLabel::Biofilm,
            ClassLabel::Biofilm => ClassLabel::Background,
            ClassLabel::Background => ClassLabel::Tooth,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "background" => Ok(ClassLabel::Background),
            "tooth" => Ok(ClassLabel::Tooth),
            "biofilm" => Ok(ClassLabel::Biofilm),
            other => Err(Error::Parameter(format!("unknown class label {other:?}"))),
        }
    }
}

/// Background cut on mean intensity and biofilm cut on divergence (nats).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub bg_threshold: f64,
    pub kl_threshold: f64,
}

impl Default for Thresholds {
    /// Calibrated on phantom seeds 0..10 with default parameters, rounded.
    fn default() -> Self {
        Self {
            bg_threshold: 0.2237,
            kl_threshold: 49.38,
        }
    }
}

impl Thresholds {
    pub fn new(bg_threshold: f64, kl_threshold: f64) -> Result<Self> {
        let th = Self {
            bg_threshold,
            kl_threshold,
        };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.bg_threshold) {
            return Err(Error::Parameter(format!(
                "background threshold {} outside [0, 1]",
                self.bg_threshold
            )));
        }
        if !(self.kl_threshold >= 0.0) {
            return Err(Error::Parameter(format!(
                "divergence threshold {} must be non-negative",
                self.kl_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpixelScore {
    pub kl: f64,
    pub mean_intensity: f64,
    pub mean_green: f64,
    /// Either channel's feature had no interior samples.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelScores {
    pub scores: Vec<SuperpixelScore>,
}

impl SuperpixelScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingExample {
    pub kl: f64,
    pub mean_intensity: f64,
    pub label: ClassLabel,
}

/// Closed-form KL divergence `KL(p || q)` between two Gaussians.
pub fn gaussian_kl_params(
    mean_p: &DVector<f64>,
    cov_p: &DMatrix<f64>,
    mean_q: &DVector<f64>,
    cov_q: &DMatrix<f64>,
) -> Result<f64> {
    let d = mean_p.len();
    if mean_q.len() != d || cov_p.shape() != (d, d) || cov_q.shape() != (d, d) {
        return Err(Error::Internal(format!(
            "gaussian dimensions differ: {d} vs {}",
            mean_q.len()
        )));
    }
    if mean_p == mean_q && cov_p == cov_q {
        return Ok(0.0);
    }
    let chol_q = cov_q
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Internal("covariance of q is not positive definite".into()))?;
    let chol_p = cov_p
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Internal("covariance of p is not positive definite".into()))?;

    let log_det = |l: &DMatrix<f64>| 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let diff = mean_q - mean_p;
    let trace = chol_q.solve(cov_p).trace();
    let mahalanobis = diff.dot(&chol_q.solve(&diff));
    let kl = 0.5 * (trace + mahalanobis - d as f64 + log_det(&chol_q.l()) - log_det(&chol_p.l()));
    Ok(kl.max(0.0))
}

pub fn gaussian_kl(p: &GmrfFeature, q: &GmrfFeature) -> Result<f64> {
    gaussian_kl_params(&p.mean, &p.covariance, &q.mean, &q.covariance)
}

/// Discrete KL `sum c1 ln(c1 / c2)` over two normalized weight vectors.
///
/// Returns `f64::INFINITY` when `c2` vanishes where `c1` does not.
pub fn aggregate_divergence(c1: &[f64], c2: &[f64]) -> Result<f64> {
    if c1.len() != c2.len() || c1.is_empty() {
        return Err(Error::Parameter(format!(
            "weight vectors must be non-empty and equally long ({} vs {})",
            c1.len(),
            c2.len()
        )));
    }
    for c in [c1, c2] {
        let sum: f64 = c.iter().sum();
        if c.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(
                "weights must be non-negative and sum to 1".into(),
            ));
        }
    }
    let mut total = 0.0;
    for (&a, &b) in c1.iter().zip(c2) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += a * (a / b).ln();
    }
    Ok(total)
}

fn normalize(values: impl Iterator<Item = f64>) -> Option<Vec<f64>> {
    let v: Vec<f64> = values.collect();
    let sum: f64 = v.iter().sum();
    (sum > 0.0).then(|| v.iter().map(|x| x / sum).collect())
}

/// Whole-image divergence between the per-superpixel mean intensity and
/// mean green profiles, each normalized to unit mass. `None` when either
/// channel is entirely black.
pub fn image_divergence(scores: &SuperpixelScores) -> Option<f64> {
    let c1 = normalize(scores.scores.iter().map(|s| s.mean_intensity))?;
    let c2 = normalize(scores.scores.iter().map(|s| s.mean_green))?;
    aggregate_divergence(&c1, &c2).ok()
}

/// Scores each superpixel by `KL(intensity || green)` of its field estimates.
pub fn score_superpixels(
    green: &ChannelFeatureSet,
    intensity: &ChannelFeatureSet,
    map: &SuperpixelMap,
    ifield: &ScalarField,
    gfield: &ScalarField,
) -> Result<SuperpixelScores> {
    let k = map.len();
    if green.features.len() != k || intensity.features.len() != k {
        return Err(Error::Internal(format!(
            "feature sets cover {} / {} superpixels, map has {k}",
            intensity.features.len(),
            green.features.len()
        )));
    }
    let n = map.labels().len();
    if ifield.len() != n || gfield.len() != n {
        return Err(Error::Internal(
            "channel fields do not match the map".into(),
        ));
    }

    let mut sums = vec![(0.0f64, 0.0f64, 0usize); k];
    for ((&l, &iv), &gv) in map
        .labels()
        .iter()
        .zip(ifield.values())
        .zip(gfield.values())
    {
        let e = &mut sums[l as usize];
        e.0 += iv;
        e.1 += gv;
        e.2 += 1;
    }

    let scores = intensity
        .features
        .iter()
        .zip(&green.features)
        .zip(sums)
        .map(|((fi, fg), (si, sg, count))| {
            let kl = gaussian_kl(fi, fg)?;
            let count = count.max(1) as f64;
            Ok(SuperpixelScore {
                kl,
                mean_intensity: si / count,
                mean_green: sg / count,
                degenerate: fi.is_degenerate() || fg.is_degenerate(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuperpixelScores { scores })
}

pub fn classify_one(score: &SuperpixelScore, th: &Thresholds) -> ClassLabel {
    if score.degenerate || score.mean_intensity < th.bg_threshold {
        ClassLabel::Background
    } else if score.kl >= th.kl_threshold {
        ClassLabel::Biofilm
    } else {
        ClassLabel::Tooth
    }
}

pub fn classify(scores: &SuperpixelScores, th: &Thresholds) -> Vec<ClassLabel> {
    scores.scores.iter().map(|s| classify_one(s, th)).collect()
}

/// Sweeps every midpoint between consecutive distinct values and returns the
/// cut with the most correct predictions, where a sample is predicted
/// positive iff `value >= cut` (or `value < cut` when `positive_below`).
/// Ties go to the smaller cut.
fn best_cut(samples: &[(f64, bool)], positive_below: bool) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total_pos = sorted.iter().filter(|s| s.1).count();
    let total_neg = sorted.len() - total_pos;

    let mut best: Option<(usize, f64)> = None;
    let (mut pos_below, mut neg_below) = (0usize, 0usize);
    for i in 0..sorted.len() {
        if sorted[i].1 {
            pos_below += 1;
        } else {
            neg_below += 1;
        }
        let Some(next) = sorted.get(i + 1) else { break };
        if next.0 == sorted[i].0 {
            continue;
        }
        let cut = 0.5 * (sorted[i].0 + next.0);
        let correct = if positive_below {
            pos_below + (total_neg - neg_below)
        } else {
            neg_below + (total_pos - pos_below)
        };
        if best.is_none_or(|(c, _)| correct > c) {
            best = Some((correct, cut));
        }
    }
    // A single distinct value admits no midpoint; cut at the value itself.
    best.map_or(sorted[0].0, |(_, cut)| cut)
}

/// Fits `(bg_threshold, kl_threshold)` to expert-labeled superpixels.
pub fn calibrate_thresholds(training: &[TrainingExample]) -> Result<Thresholds> {
    for class in ClassLabel::ALL {
        if !training.iter().any(|t| t.label == class) {
            return Err(Error::Calibration(format!(
                "training data contains no {class} examples"
            )));
        }
    }
    let bg: Vec<(f64, bool)> = training
        .iter()
        .map(|t| (t.mean_intensity, t.label == ClassLabel::Background))
        .collect();
    let fg: Vec<(f64, bool)> = training
        .iter()
        .filter(|t| t.label != ClassLabel::Background)
        .map(|t| (t.kl, t.label == ClassLabel::Biofilm))
        .collect();
    Thresholds::new(best_cut(&bg, true), best_cut(&fg, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn normal_1d(mean: f64, var: f64) -> GmrfFeature {
        GmrfFeature {
            superpixel_id: 0,
            mean: DVector::from_element(1, mean),
            covariance: DMatrix::from_element(1, 1, var),
            n_samples: 10,
        }
    }

    /// Composite Simpson quadrature of p ln(p/q) in 1-D.
    fn kl_quadrature_1d(mp: f64, vp: f64, mq: f64, vq: f64) -> f64 {
        let pdf = |x: f64, m: f64, v: f64| {
            (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
        };
        let sd = vp.sqrt();
        let (a, b, n) = (mp - 14.0 * sd, mp + 14.0 * sd, 20_000);
        let h = (b - a) / n as f64;
        let f = |x: f64| {
            let p = pdf(x, mp, vp);
            if p == 0.0 {
                0.0
            } else {
                p * (p / pdf(x, mq, vq)).ln()
            }
        };
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn identical_is_zero() {
        let p = normal_1d(0.3, 2.0);
        assert_eq!(gaussian_kl(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn unit_shift_is_half() {
        let kl = gaussian_kl(&normal_1d(0.0, 1.0), &normal_1d(1.0, 1.0)).unwrap();
        let oracle = kl_quadrature_1d(0.0, 1.0, 1.0, 1.0);
        assert!((oracle - 0.5).abs() < 1e-9);
        assert!((kl - oracle).abs() < 1e-9);
    }

    #[test]
    fn asymmetry_against_quadrature() {
        let narrow = normal_1d(0.0, 1.0);
        let wide = normal_1d(0.0, 4.0);
        let fwd = gaussian_kl(&narrow, &wide).unwrap();
        let rev = gaussian_kl(&wide, &narrow).unwrap();
        let fwd_oracle = kl_quadrature_1d(0.0, 1.0, 0.0, 4.0);
        let rev_oracle = kl_quadrature_1d(0.0, 4.0, 0.0, 1.0);
        // Frozen from the quadrature oracle.
        assert!((fwd_oracle - 0.318_147).abs() < 1e-6);
        assert!((rev_oracle - 0.806_853).abs() < 1e-6);
        assert!((fwd - fwd_oracle).abs() < 1e-6);
        assert!((rev - rev_oracle).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch_and_non_pd() {
        let p = normal_1d(0.0, 1.0);
        let mut q = p.clone();
        q.mean = DVector::zeros(2);
        q.covariance = DMatrix::identity(2, 2);
        assert!(matches!(gaussian_kl(&p, &q), Err(Error::Internal(_))));
        let bad = normal_1d(1.0, -1.0);
        assert!(matches!(gaussian_kl(&p, &bad), Err(Error::Internal(_))));
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate_divergence(&[0.25; 4], &[0.25; 4]).unwrap(), 0.0);
        assert_eq!(aggregate_divergence(&[1.0], &[1.0]).unwrap(), 0.0);
        let v = aggregate_divergence(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
        let brute: f64 = [(0.5f64, 0.9f64), (0.5, 0.1)]
            .iter()
            .map(|(a, b)| a * (a / b).ln())
            .sum();
        assert!((v - brute).abs() < 1e-15);
        assert!((v - 0.5108).abs() < 1e-4);
        assert_eq!(
            aggregate_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            f64::INFINITY
        );
        assert!(aggregate_divergence(&[0.5, 0.5], &[1.0]).is_err());
        assert!(aggregate_divergence(&[0.7, 0.7], &[0.5, 0.5]).is_err());
    }

    fn score(mean_intensity: f64, kl: f64) -> SuperpixelScore {
        SuperpixelScore {
            kl,
            mean_intensity,
            mean_green: mean_intensity,
            degenerate: false,
        }
    }

    #[test]
    fn classification_rule() {
        let th = Thresholds::new(0.08, 1.0).unwrap();
        assert_eq!(classify_one(&score(0.02, 0.0), &th), ClassLabel::Background);
        assert_eq!(classify_one(&score(0.6, 5.0), &th), ClassLabel::Biofilm);
        assert_eq!(classify_one(&score(0.6, 0.1), &th), ClassLabel::Tooth);
        let degenerate = SuperpixelScore {
            degenerate: true,
            ..score(0.6, 5.0)
        };
        assert_eq!(classify_one(&degenerate, &th), ClassLabel::Background);
    }

    #[test]
    fn label_strings_and_cycle() {
        for l in ClassLabel::ALL {
            assert_eq!(l.as_str().parse::<ClassLabel>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{l}\""));
            assert_eq!(l.next_in_cycle().next_in_cycle().next_in_cycle(), l);
        }
        assert!("plaque".parse::<ClassLabel>().is_err());
    }

    #[test]
    fn thresholds_json_shape() {
        let th = Thresholds::new(0.1, 2.5).unwrap();
        assert_eq!(
            serde_json::to_string(&th).unwrap(),
            r#"{"bg_threshold":0.1,"kl_threshold":2.5}"#
        );
        assert!(Thresholds::new(1.5, 0.0).is_err());
        assert!(Thresholds::new(0.5, -1.0).is_err());
    }

    fn example(mean_intensity: f64, kl: f64, label: ClassLabel) -> TrainingExample {
        TrainingExample {
            kl,
            mean_intensity,
            label,
        }
    }

    #[test]
    fn separable_calibration() {
        use ClassLabel::*;
        let training = vec![
            example(0.01, 0.1, Background),
            example(0.05, 0.3, Background),
            example(0.3, 0.5, Tooth),
            example(0.6, 0.2, Tooth),
            example(0.4, 2.0, Biofilm),
            example(0.5, 7.0, Biofilm),
        ];
        let th = calibrate_thresholds(&training).unwrap();
        assert!(th.bg_threshold > 0.05 && th.bg_threshold < 0.3);
        assert!(th.kl_threshold > 0.5 && th.kl_threshold < 2.0);
        for t in &training {
            let s = score(t.mean_intensity, t.kl);
            assert_eq!(classify_one(&s, &th), t.label);
        }
    }

    /// Exhaustive oracle: try every midpoint, count errors directly.
    fn brute_kl_cut(training: &[TrainingExample]) -> f64 {
        let fg: Vec<_> = training
            .iter()
            .filter(|t| t.label != ClassLabel::Background)
            .collect();
        let mut values: Vec<f64> = fg.iter().map(|t| t.kl).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut best = (usize::MAX, f64::NAN);
        for pair in values.windows(2) {
            let cut = 0.5 * (pair[0] + pair[1]);
            let errors = fg
                .iter()
                .filter(|t| (t.kl >= cut) != (t.label == ClassLabel::Biofilm))
                .count();
            if errors < best.0 {
                best = (errors, cut);
            }
        }
        best.1
    }

    #[test]
    fn overlapping_calibration_matches_sweep_oracle() {
        use ClassLabel::*;
        let mut training = vec![
            example(0.01, 0.0, Background),
            example(0.02, 9.0, Background),
        ];
        for (i, kl) in [0.1, 0.4, 0.9, 1.3, 2.2, 0.7].iter().enumerate() {
            training.push(example(0.5 + i as f64 * 0.01, *kl, Tooth));
        }
        for (i, kl) in [0.8, 1.1, 1.9, 2.5, 3.0, 0.35].iter().enumerate() {
            training.push(example(0.4 + i as f64 * 0.01, *kl, Biofilm));
        }
        let th = calibrate_thresholds(&training).unwrap();
        assert_eq!(th.kl_threshold, brute_kl_cut(&training));
    }

    #[test]
    fn calibration_needs_every_class() {
        use ClassLabel::*;
        let training = vec![example(0.01, 0.1, Background), example(0.5, 0.3, Tooth)];
        let err = calibrate_thresholds(&training).unwrap_err();
        assert!(err.to_string().contains("biofilm"));
    }

    proptest! {
        #[test]
        fn aggregate_self_is_zero(raw in prop::collection::vec(0.01f64..10.0, 1..40)) {
            let sum: f64 = raw.iter().sum();
            let c: Vec<f64> = raw.iter().map(|v| v / sum).collect();
            prop_assert_eq!(aggregate_divergence(&c, &c).unwrap(), 0.0);
        }

        #[test]
        fn classify_is_monotone(
            i in 0.0f64..1.0, kl in 0.0f64..50.0, bump in 0.0f64..50.0, drop in 0.0f64..1.0,
            bg in 0.0f64..1.0, cut in 0.0f64..20.0,
        ) {
            let th = Thresholds::new(bg, cut).unwrap();
            let base = classify_one(&score(i, kl), &th);
            let raised = classify_one(&score(i, kl + bump), &th);
            if base == ClassLabel::Biofilm {
                prop_assert_eq!(raised, ClassLabel::Biofilm);
            }
            let darker = classify_one(&score((i - drop).max(0.0), kl), &th);
            if base == ClassLabel::Background {
                prop_assert_eq!(darker, ClassLabel::Background);
            }
        }
    }
}
