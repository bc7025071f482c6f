//! On-disk layout of per-image results.
//!
//! An image `jaw_07.png` produces `jaw_07_labels.png` (palette label image)
//! and `jaw_07_report.json` in the output directory.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::color::RgbImage;
use crate::error::Result;
use crate::quant::QuantReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputPaths {
    pub labels: PathBuf,
    pub report: PathBuf,
}

/// File stem used for outputs; the image id with any extension removed.
pub fn output_stem(image_id: &str) -> String {
    Path::new(image_id)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "image".to_string())
}

pub fn output_paths(out_dir: &Path, image_id: &str) -> OutputPaths {
    let stem = output_stem(image_id);
    OutputPaths {
        labels: out_dir.join(format!("{stem}_labels.png")),
        report: out_dir.join(format!("{stem}_report.json")),
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_result(
    out_dir: &Path,
    labels: &RgbImage,
    report: &QuantReport,
) -> Result<OutputPaths> {
    std::fs::create_dir_all(out_dir)?;
    let paths = output_paths(out_dir, &report.image);
    labels.save_png(&paths.labels)?;
    write_json(&paths.report, report)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(output_stem("jaw_07.png"), "jaw_07");
        assert_eq!(output_stem("scan.v2.jpeg"), "scan.v2");
        assert_eq!(output_stem("plain"), "plain");
        assert_eq!(output_stem(""), "image");
        let p = output_paths(Path::new("/out"), "a.jpg");
        assert_eq!(p.labels, Path::new("/out/a_labels.png"));
        assert_eq!(p.report, Path::new("/out/a_report.json"));
    }
}
