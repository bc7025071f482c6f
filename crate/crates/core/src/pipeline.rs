//! End-to-end automatic stage: HSI, SLIC on intensity, field estimates in
//! both channels, divergence scores, classification and quantification.

use crate::color::{green_channel, intensity_channel, rgb_to_hsi, RgbImage, ScalarField};
use crate::divergence::{
    classify, score_superpixels, ClassLabel, SuperpixelScores, Thresholds, TrainingExample,
};
use crate::error::{Error, Result};
use crate::gmrf::{estimate_all, Channel, ChannelFeatureSet, GmrfConfig};
use crate::quant::{compute_bqi, superpixel_areas, QuantReport};
use crate::session::SegmentationResult;
use crate::superpixel::{slic_segment, SlicParams, SuperpixelMap};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub slic: SlicParams,
    pub gmrf: GmrfConfig,
    pub thresholds: Thresholds,
}

/// Threshold-independent part of the pipeline.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub intensity: ScalarField,
    pub green: ScalarField,
    pub map: SuperpixelMap,
    pub intensity_features: ChannelFeatureSet,
    pub green_features: ChannelFeatureSet,
    pub scores: SuperpixelScores,
}

pub fn analyze(img: &RgbImage, slic: &SlicParams, gmrf: &GmrfConfig) -> Result<Analysis> {
    let intensity = intensity_channel(&rgb_to_hsi(img));
    let green = green_channel(img);
    let map = slic_segment(&intensity, slic)?;
    let intensity_features = estimate_all(&intensity, &map, gmrf, Channel::Intensity)?;
    let green_features = estimate_all(&green, &map, gmrf, Channel::Green)?;
    let scores = score_superpixels(
        &green_features,
        &intensity_features,
        &map,
        &intensity,
        &green,
    )?;
    Ok(Analysis {
        intensity,
        green,
        map,
        intensity_features,
        green_features,
        scores,
    })
}

impl Analysis {
    pub fn into_result(self, thresholds: Thresholds, image_id: &str) -> Result<SegmentationResult> {
        let labels = classify(&self.scores, &thresholds);
        let stats = superpixel_areas(&self.map);
        let summary = compute_bqi(&labels, &stats)?;
        let report = QuantReport::new(image_id, self.map.len(), summary, thresholds);
        Ok(SegmentationResult {
            map: self.map,
            scores: self.scores,
            labels,
            stats,
            report,
            source_image_id: image_id.to_string(),
        })
    }
}

/// Expert class of every superpixel by majority vote over a per-pixel truth
/// map. Exact ties resolve in the order background, tooth, biofilm.
pub fn majority_labels(map: &SuperpixelMap, truth: &[ClassLabel]) -> Result<Vec<ClassLabel>> {
    if truth.len() != map.labels().len() {
        return Err(Error::Parameter(format!(
            "truth has {} pixels, image has {}",
            truth.len(),
            map.labels().len()
        )));
    }
    let mut votes = vec![[0usize; 3]; map.len()];
    for (&l, &t) in map.labels().iter().zip(truth) {
        votes[l as usize][t as usize] += 1;
    }
    Ok(votes
        .iter()
        .map(|v| {
            let mut best = 0;
            for c in 1..3 {
                if v[c] > v[best] {
                    best = c;
                }
            }
            ClassLabel::ALL[best]
        })
        .collect())
}

impl Analysis {
    /// One training example per superpixel, labeled by majority vote.
    pub fn training_examples(&self, truth: &[ClassLabel]) -> Result<Vec<TrainingExample>> {
        let labels = majority_labels(&self.map, truth)?;
        Ok(self
            .scores
            .scores
            .iter()
            .zip(labels)
            .map(|(s, label)| TrainingExample {
                kl: s.kl,
                mean_intensity: s.mean_intensity,
                label,
            })
            .collect())
    }
}

pub fn segment(img: &RgbImage, cfg: &PipelineConfig, image_id: &str) -> Result<SegmentationResult> {
    cfg.thresholds.validate()?;
    analyze(img, &cfg.slic, &cfg.gmrf)?.into_result(cfg.thresholds, image_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_channels_give_zero_divergence() {
        // Gray pixels: green == intensity everywhere.
        let pixels = (0..24 * 24)
            .map(|p| {
                let v = (((p % 24) * 7 + (p / 24) * 3) % 200 + 30) as u8;
                [v, v, v]
            })
            .collect();
        let img = RgbImage::new(24, 24, pixels).unwrap();
        let a = analyze(&img, &SlicParams::with_k(9), &GmrfConfig::default()).unwrap();
        assert!(a.scores.scores.iter().all(|s| s.kl == 0.0));
    }

    #[test]
    fn majority_vote_and_ties() {
        use ClassLabel::*;
        let map = SuperpixelMap::from_labels(4, 1, vec![0, 0, 1, 1], 1.0).unwrap();
        let labels = majority_labels(&map, &[Tooth, Tooth, Biofilm, Tooth]).unwrap();
        assert_eq!(labels, vec![Tooth, Tooth]);
        let labels = majority_labels(&map, &[Biofilm, Background, Biofilm, Biofilm]).unwrap();
        assert_eq!(labels, vec![Background, Biofilm]);
        assert!(majority_labels(&map, &[Tooth]).is_err());
    }

    #[test]
    fn black_image_is_background_only() {
        let img = RgbImage::filled(32, 24, [0, 0, 0]).unwrap();
        let r = segment(&img, &PipelineConfig::default(), "black").unwrap();
        assert_eq!(r.report.bqi, 0.0);
        assert!(r.report.no_tooth);
        assert!(r.scores.scores.iter().all(|s| s.mean_intensity == 0.0));
    }
}
