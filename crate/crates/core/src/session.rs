//! Click-switch review sessions over a segmentation result.
//!
//! Edits are appended to a log; the current labels are always the initial
//! labels with the log replayed on top, which is what makes undo cheap.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::color::RgbImage;
use crate::divergence::{ClassLabel, SuperpixelScores};
use crate::error::{Error, Result};
use crate::quant::{compute_bqi, superpixel_areas, QuantReport, SuperpixelStats};
use crate::render::{render_labels, MAX_ENCODABLE_SUPERPIXELS};
use crate::superpixel::SuperpixelMap;

/// Everything the automatic stage produces for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub map: SuperpixelMap,
    pub scores: SuperpixelScores,
    pub labels: Vec<ClassLabel>,
    pub stats: SuperpixelStats,
    pub report: QuantReport,
    pub source_image_id: String,
}

impl SegmentationResult {
    /// Checks that labels, scores and areas line up with the map and that
    /// the report is exactly what the labels imply.
    pub fn verify(&self) -> Result<()> {
        let k = self.map.len();
        if self.labels.len() != k || self.scores.len() != k || self.stats.areas.len() != k {
            return Err(Error::Integrity(format!(
                "map has {k} superpixels but labels/scores/areas have {}/{}/{}",
                self.labels.len(),
                self.scores.len(),
                self.stats.areas.len()
            )));
        }
        if k > MAX_ENCODABLE_SUPERPIXELS {
            return Err(Error::Integrity(format!(
                "{k} superpixels exceed the label-map id range"
            )));
        }
        if self.stats != superpixel_areas(&self.map) {
            return Err(Error::Integrity(
                "superpixel areas do not match the map".into(),
            ));
        }
        let fresh = compute_bqi(&self.labels, &self.stats)?;
        let r = &self.report;
        if r.bqi.to_bits() != fresh.bqi.to_bits()
            || r.areas != fresh.areas
            || r.no_tooth != fresh.no_tooth
            || r.k_actual != k
        {
            return Err(Error::Integrity(format!(
                "report (bqi {}) does not match its labels (bqi {})",
                r.bqi, fresh.bqi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub superpixel: usize,
    pub old_label: ClassLabel,
    pub new_label: ClassLabel,
}

/// Result of a single label edit, as sent back to the review UI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditOutcome {
    pub superpixel: usize,
    pub old_label: ClassLabel,
    pub new_label: ClassLabel,
    pub bqi: f64,
    pub revision: u64,
}

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    initial_labels: Vec<ClassLabel>,
    result: SegmentationResult,
    edit_log: Vec<Edit>,
}

pub fn create_session(result: SegmentationResult) -> Result<Session> {
    Session::new(result)
}

impl Session {
    pub fn new(result: SegmentationResult) -> Result<Self> {
        result.verify()?;
        let n = NEXT_SESSION.fetch_add(1, Ordering::Relaxed);
        Ok(Self {
            id: format!("s{n}"),
            initial_labels: result.labels.clone(),
            result,
            edit_log: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn revision(&self) -> u64 {
        self.edit_log.len() as u64
    }

    pub fn result(&self) -> &SegmentationResult {
        &self.result
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.result.labels
    }

    pub fn initial_labels(&self) -> &[ClassLabel] {
        &self.initial_labels
    }

    pub fn edit_log(&self) -> &[Edit] {
        &self.edit_log
    }

    pub fn report(&self) -> &QuantReport {
        &self.result.report
    }

    pub fn bqi(&self) -> f64 {
        self.result.report.bqi
    }

    /// Superpixel under an image-pixel click.
    pub fn locate_superpixel(&self, x: i64, y: i64) -> Result<usize> {
        let map = &self.result.map;
        let (w, h) = (map.width(), map.height());
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: w,
                height: h,
            });
        }
        Ok(map.label_at(x as usize, y as usize) as usize)
    }

    /// Advances the clicked superpixel one step around the label cycle.
    pub fn toggle_label(&mut self, x: i64, y: i64) -> Result<EditOutcome> {
        let sp = self.locate_superpixel(x, y)?;
        let next = self.result.labels[sp].next_in_cycle();
        self.apply(sp, next)
    }

    /// Sets a label directly. Setting the current label still counts as an
    /// edit (logged, revision bumped).
    pub fn set_label(&mut self, sp: usize, label: ClassLabel) -> Result<EditOutcome> {
        if sp >= self.result.labels.len() {
            return Err(Error::UnknownSuperpixel(sp));
        }
        self.apply(sp, label)
    }

    /// Drops the latest edit and rebuilds the state from the log.
    pub fn undo(&mut self) -> Result<Edit> {
        let last = self.edit_log.pop().ok_or(Error::NothingToUndo)?;
        self.result.labels = replay(&self.initial_labels, &self.edit_log);
        self.refresh_report()?;
        Ok(last)
    }

    /// Palette label image and the report for the current labels.
    pub fn export_result(&self) -> (RgbImage, QuantReport) {
        (
            render_labels(&self.result.map, &self.result.labels),
            self.result.report.clone(),
        )
    }

    fn apply(&mut self, sp: usize, label: ClassLabel) -> Result<EditOutcome> {
        let old = self.result.labels[sp];
        self.result.labels[sp] = label;
        self.edit_log.push(Edit {
            superpixel: sp,
            old_label: old,
            new_label: label,
        });
        self.refresh_report()?;
        Ok(EditOutcome {
            superpixel: sp,
            old_label: old,
            new_label: label,
            bqi: self.bqi(),
            revision: self.revision(),
        })
    }

    fn refresh_report(&mut self) -> Result<()> {
        let summary = compute_bqi(&self.result.labels, &self.result.stats)?;
        let report = &mut self.result.report;
        report.bqi = summary.bqi;
        report.areas = summary.areas;
        report.no_tooth = summary.no_tooth;
        report.revision = self.edit_log.len() as u64;
        Ok(())
    }
}

/// Applies `log` on top of `initial`.
pub fn replay(initial: &[ClassLabel], log: &[Edit]) -> Vec<ClassLabel> {
    let mut labels = initial.to_vec();
    for e in log {
        labels[e.superpixel] = e.new_label;
    }
    labels
}
