//! Biofilm quantification index and longitudinal summaries.

use std::collections::BTreeSet;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::divergence::{ClassLabel, Thresholds};
use crate::error::{Error, Result};
use crate::superpixel::SuperpixelMap;

/// Pixel area of every superpixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelStats {
    pub areas: Vec<u64>,
}

impl SuperpixelStats {
    pub fn total(&self) -> u64 {
        self.areas.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassAreas {
    pub background: u64,
    pub tooth: u64,
    pub biofilm: u64,
}

impl ClassAreas {
    pub fn total(&self) -> u64 {
        self.background + self.tooth + self.biofilm
    }
}

/// BQI plus the class areas it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqiSummary {
    pub bqi: f64,
    pub areas: ClassAreas,
    /// No tooth or biofilm pixels at all; `bqi` is reported as 0.
    pub no_tooth: bool,
}

/// Per-image quantification report, serialized as the `*_report.json` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReport {
    pub image: String,
    pub k_actual: usize,
    pub bqi: f64,
    pub areas: ClassAreas,
    pub no_tooth: bool,
    pub thresholds: Thresholds,
    pub revision: u64,
}

impl QuantReport {
    pub fn new(
        image: impl Into<String>,
        k_actual: usize,
        summary: BqiSummary,
        thresholds: Thresholds,
    ) -> Self {
        Self {
            image: image.into(),
            k_actual,
            bqi: summary.bqi,
            areas: summary.areas,
            no_tooth: summary.no_tooth,
            thresholds,
            revision: 0,
        }
    }
}

pub fn superpixel_areas(map: &SuperpixelMap) -> SuperpixelStats {
    let mut areas = vec![0u64; map.len()];
    for &l in map.labels() {
        areas[l as usize] += 1;
    }
    SuperpixelStats { areas }
}

/// Biofilm area over total tooth area (substratum plus biofilm).
pub fn compute_bqi(labels: &[ClassLabel], stats: &SuperpixelStats) -> Result<BqiSummary> {
    if labels.len() != stats.areas.len() {
        return Err(Error::Internal(format!(
            "{} labels for {} superpixels",
            labels.len(),
            stats.areas.len()
        )));
    }
    let mut areas = ClassAreas::default();
    for (&label, &area) in labels.iter().zip(&stats.areas) {
        match label {
            ClassLabel::Background => areas.background += area,
            ClassLabel::Tooth => areas.tooth += area,
            ClassLabel::Biofilm => areas.biofilm += area,
        }
    }
    let denom = areas.tooth + areas.biofilm;
    Ok(BqiSummary {
        bqi: if denom == 0 {
            0.0
        } else {
            areas.biofilm as f64 / denom as f64
        },
        areas,
        no_tooth: denom == 0,
    })
}

/// Parses an ISO-8601 instant. Offsets are honored; bare date-times and
/// dates are taken as UTC.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
    ] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc());
    }
    Err(Error::Parameter(format!(
        "invalid ISO-8601 timestamp {s:?}"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub timestamp: DateTime<Utc>,
    pub bqi: f64,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongitudinalReport {
    pub subject_id: String,
    pub series: Vec<SeriesPoint>,
    pub mean_bqi: f64,
}

pub fn longitudinal_summary(
    entries: &[(DateTime<Utc>, QuantReport)],
    subject_id: &str,
) -> Result<LongitudinalReport> {
    if entries.is_empty() {
        return Err(Error::Parameter(format!(
            "subject {subject_id} has no time points"
        )));
    }
    let mut seen = BTreeSet::new();
    for (t, _) in entries {
        if !seen.insert(*t) {
            return Err(Error::DuplicateTimestamp {
                subject: subject_id.to_string(),
                timestamp: t.to_rfc3339(),
            });
        }
    }
    let mut series: Vec<SeriesPoint> = entries
        .iter()
        .map(|(t, r)| SeriesPoint {
            timestamp: *t,
            bqi: r.bqi,
            image: r.image.clone(),
        })
        .collect();
    series.sort_by_key(|p| p.timestamp);
    let mean_bqi = series.iter().map(|p| p.bqi).sum::<f64>() / series.len() as f64;
    Ok(LongitudinalReport {
        subject_id: subject_id.to_string(),
        series,
        mean_bqi,
    })
}
