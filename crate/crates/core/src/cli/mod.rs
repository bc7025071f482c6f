//! Command-line front end: argument types and the five subcommands.
//!
//! Each `cmd_*` function is usable directly from Rust; [`run`] dispatches a
//! parsed [`Cli`] and prints a short summary to stdout.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::load_image;
use crate::divergence::{calibrate_thresholds, image_divergence, Thresholds};
use crate::error::{Error, Result};
use crate::gmrf::GmrfConfig;
use crate::output::{output_stem, write_json, write_result, OutputPaths};
use crate::pipeline::{analyze, segment, PipelineConfig};
use crate::quant::{longitudinal_summary, parse_timestamp, LongitudinalReport, QuantReport};
use crate::render::{decode_truth, render_labels};
use crate::service::{ReviewServer, SessionStore};
use crate::session::{SegmentationResult, Session};
use crate::superpixel::SlicParams;

#[derive(Debug, Parser)]
#[command(
    name = "qlfseg",
    version,
    about = "Biofilm segmentation and quantification for QLF images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image and write its label image and report.
    Segment {
        #[command(flatten)]
        run: RunArgs,
        input: PathBuf,
    },
    /// Segment every PNG/JPEG in a directory.
    Batch {
        #[command(flatten)]
        run: RunArgs,
        input_dir: PathBuf,
    },
    /// Per-subject BQI series from a CSV manifest (subject_id,timestamp,image_path).
    Longitudinal {
        #[command(flatten)]
        run: RunArgs,
        manifest: PathBuf,
        /// Output JSON [default: <out-dir>/longitudinal.json]
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Fit thresholds to images paired with `<stem>_truth.png` palette labels.
    Calibrate {
        #[command(flatten)]
        run: RunArgs,
        labeled_dir: PathBuf,
        /// Output JSON [default: <out-dir>/thresholds.json]
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Segment the inputs and serve them for review over HTTP.
    Serve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 8077)]
        port: u16,
        /// Interface to bind; anything but loopback exposes the unauthenticated API.
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Rewrite the label image and report after every edit.
        #[arg(long)]
        export_on_edit: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Neighborhood {
    #[value(name = "4")]
    Four,
    #[value(name = "8")]
    Eight,
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Requested superpixel count.
    #[arg(long, default_value_t = 600)]
    pub superpixels: usize,
    #[arg(long, default_value_t = 10.0)]
    pub compactness: f64,
    #[arg(long, default_value_t = 10)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub convergence_eps: f64,
    /// GMRF neighborhood.
    #[arg(long, value_enum, default_value = "4")]
    pub neighborhood: Neighborhood,
    /// Covariance ridge.
    #[arg(long, default_value_t = crate::gmrf::DEFAULT_RIDGE)]
    pub ridge: f64,
    /// Mean-intensity cut below which a superpixel is background.
    #[arg(long)]
    pub bg_threshold: Option<f64>,
    /// Divergence cut at or above which a superpixel is biofilm.
    #[arg(long)]
    pub kl_threshold: Option<f64>,
    /// Thresholds JSON (as written by `calibrate`); overrides the two flags.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads [default: available cores].
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Default for RunArgs {
    fn default() -> Self {
        RunArgs::parse_from_flags(&[])
    }
}

impl RunArgs {
    fn parse_from_flags(flags: &[&str]) -> Self {
        #[derive(Parser)]
        struct Wrapper {
            #[command(flatten)]
            run: RunArgs,
        }
        let argv = std::iter::once("qlfseg").chain(flags.iter().copied());
        Wrapper::parse_from(argv).run
    }

    pub fn to_config(&self) -> Result<RunConfig> {
        let slic = SlicParams {
            k: self.superpixels,
            compactness: self.compactness,
            max_iters: self.max_iters,
            convergence_eps: self.convergence_eps,
        };
        slic.check()?;
        let gmrf = match self.neighborhood {
            Neighborhood::Four => GmrfConfig::four_neighborhood(self.ridge)?,
            Neighborhood::Eight => GmrfConfig::eight_neighborhood(self.ridge)?,
        };
        let thresholds = match &self.thresholds {
            Some(path) => read_thresholds(path)?,
            None => {
                let d = Thresholds::default();
                Thresholds::new(
                    self.bg_threshold.unwrap_or(d.bg_threshold),
                    self.kl_threshold.unwrap_or(d.kl_threshold),
                )?
            }
        };
        let jobs = self.jobs.unwrap_or_else(default_jobs);
        if jobs == 0 {
            return Err(Error::Parameter("--jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            pipeline: PipelineConfig {
                slic,
                gmrf,
                thresholds,
            },
            out_dir: self.out_dir.clone(),
            jobs,
        })
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Validated settings for one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(pipeline: PipelineConfig, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            pipeline,
            out_dir: out_dir.into(),
            jobs: default_jobs(),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))
    }
}

pub fn read_thresholds(path: &Path) -> Result<Thresholds> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
    let th: Thresholds = serde_json::from_str(&text).map_err(|e| Error::input(path, e))?;
    th.validate()?;
    Ok(th)
}

fn image_id(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Run metadata written next to each report, kept out of the report itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub superpixels: usize,
    pub compactness: f64,
    pub max_iters: usize,
    pub convergence_eps: f64,
    pub neighborhood: usize,
    pub ridge: f64,
    pub thresholds: Thresholds,
    pub k_actual: usize,
    /// Whole-image divergence between normalized per-superpixel means.
    pub image_divergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentOutputs {
    pub report: QuantReport,
    pub paths: OutputPaths,
    pub metadata: PathBuf,
}

fn segment_file(cfg: &PipelineConfig, input: &Path) -> Result<SegmentationResult> {
    let img = load_image(input)?;
    segment(&img, cfg, &image_id(input))
}

/// Segments one image into `<out-dir>/<stem>_{labels.png,report.json,meta.json}`.
pub fn cmd_segment(cfg: &RunConfig, input: &Path) -> Result<SegmentOutputs> {
    let result = segment_file(&cfg.pipeline, input)?;
    write_segment_outputs(cfg, input, &result)
}

fn write_segment_outputs(
    cfg: &RunConfig,
    input: &Path,
    result: &SegmentationResult,
) -> Result<SegmentOutputs> {
    let label_img = render_labels(&result.map, &result.labels);
    let paths = write_result(&cfg.out_dir, &label_img, &result.report)?;
    let p = &cfg.pipeline;
    let meta = RunMetadata {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: input.display().to_string(),
        superpixels: p.slic.k,
        compactness: p.slic.compactness,
        max_iters: p.slic.max_iters,
        convergence_eps: p.slic.convergence_eps,
        neighborhood: p.gmrf.offsets().len(),
        ridge: p.gmrf.ridge(),
        thresholds: p.thresholds,
        k_actual: result.map.len(),
        image_divergence: image_divergence(&result.scores),
    };
    let metadata = cfg
        .out_dir
        .join(format!("{}_meta.json", output_stem(&result.report.image)));
    write_json(&metadata, &meta)?;
    Ok(SegmentOutputs {
        report: result.report.clone(),
        paths,
        metadata,
    })
}

fn is_raster(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
}

/// PNG/JPEG files (by extension) directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::input(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::input(dir, e))?.path();
        if is_raster(&path) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub image: String,
    pub bqi: f64,
    pub k_actual: usize,
    pub no_tooth: bool,
    pub labels: PathBuf,
    pub report: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub image: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub images: Vec<BatchEntry>,
    pub failures: Vec<BatchFailure>,
}

/// Segments every image in `input_dir`; per-image failures are recorded in
/// `batch_summary.json` and do not stop the run.
pub fn cmd_batch(cfg: &RunConfig, input_dir: &Path) -> Result<BatchSummary> {
    let files = list_images(input_dir)?;
    if files.is_empty() {
        return Err(Error::input(input_dir, "no PNG or JPEG images found"));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;

    // Two inputs sharing a stem would overwrite each other's outputs.
    let mut stems = HashSet::new();
    let jobs: Vec<(PathBuf, bool)> = files
        .into_iter()
        .map(|f| {
            let fresh = stems.insert(output_stem(&image_id(&f)));
            (f, fresh)
        })
        .collect();

    let outcomes: Vec<(String, Result<SegmentOutputs>)> = cfg.pool()?.install(|| {
        jobs.par_iter()
            .map(|(f, fresh)| {
                let out = if *fresh {
                    cmd_segment(cfg, f)
                } else {
                    Err(Error::input(f, "another input already uses this file stem"))
                };
                (image_id(f), out)
            })
            .collect()
    });

    let mut summary = BatchSummary {
        images: Vec::new(),
        failures: Vec::new(),
    };
    for (image, out) in outcomes {
        match out {
            Ok(o) => summary.images.push(BatchEntry {
                image,
                bqi: o.report.bqi,
                k_actual: o.report.k_actual,
                no_tooth: o.report.no_tooth,
                labels: o.paths.labels,
                report: o.paths.report,
            }),
            Err(e) => summary.failures.push(BatchFailure {
                image,
                error: e.to_string(),
            }),
        }
    }
    write_json(&cfg.out_dir.join("batch_summary.json"), &summary)?;
    Ok(summary)
}

/// One validated manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub line: u64,
    pub subject_id: String,
    pub timestamp: chrono::DateTime<chrono::Utc>,
    pub image_path: PathBuf,
}

const MANIFEST_HEADER: [&str; 3] = ["subject_id", "timestamp", "image_path"];

/// Parses a longitudinal manifest. Relative image paths resolve against
/// the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let err = |line: u64, message: String| Error::Manifest {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::input(path, e))?;
    let header = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(MANIFEST_HEADER) {
        return Err(err(
            1,
            format!("header must be {}", MANIFEST_HEADER.join(",")),
        ));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rows = Vec::new();
    let mut seen: HashSet<(String, chrono::DateTime<chrono::Utc>)> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let (subject, ts, image) = (&record[0], &record[1], &record[2]);
        if subject.is_empty() || image.is_empty() {
            return Err(err(line, "empty subject_id or image_path".into()));
        }
        let timestamp = parse_timestamp(ts).map_err(|e| err(line, e.to_string()))?;
        if !seen.insert((subject.to_string(), timestamp)) {
            return Err(err(
                line,
                format!("duplicate timestamp {ts} for subject {subject}"),
            ));
        }
        rows.push(ManifestRow {
            line,
            subject_id: subject.to_string(),
            timestamp,
            image_path: base.join(image),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongitudinalDocument {
    pub subjects: Vec<LongitudinalReport>,
}

/// Segments every manifest image and writes per-subject series, subjects
/// sorted by id and time points by timestamp.
pub fn cmd_longitudinal(
    cfg: &RunConfig,
    manifest: &Path,
    out: &Path,
) -> Result<LongitudinalDocument> {
    let rows = read_manifest(manifest)?;
    let reports: Vec<QuantReport> = cfg.pool()?.install(|| {
        rows.par_iter()
            .map(|r| segment_file(&cfg.pipeline, &r.image_path).map(|s| s.report))
            .collect::<Result<_>>()
    })?;
    let mut by_subject: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for (row, report) in rows.iter().zip(reports) {
        by_subject
            .entry(&row.subject_id)
            .or_default()
            .push((row.timestamp, report));
    }
    let subjects = by_subject
        .iter()
        .map(|(subject, entries)| longitudinal_summary(entries, subject))
        .collect::<Result<_>>()?;
    let doc = LongitudinalDocument { subjects };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_json(out, &doc)?;
    Ok(doc)
}

/// Image paths in `dir` paired with their `<stem>_truth.png` label images.
pub fn labeled_pairs(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let files = list_images(dir)?;
    let mut pairs = Vec::new();
    for f in &files {
        let stem = output_stem(&image_id(f));
        if stem.ends_with("_truth") {
            continue;
        }
        let truth = dir.join(format!("{stem}_truth.png"));
        if !truth.is_file() {
            return Err(Error::input(
                f,
                format!("missing truth image {}", truth.display()),
            ));
        }
        pairs.push((f.clone(), truth));
    }
    if pairs.is_empty() {
        return Err(Error::input(dir, "no labeled images found"));
    }
    Ok(pairs)
}

/// Fits thresholds to expert-labeled images and writes them as JSON.
pub fn cmd_calibrate(cfg: &RunConfig, labeled_dir: &Path, out: &Path) -> Result<Thresholds> {
    let pairs = labeled_pairs(labeled_dir)?;
    let p = &cfg.pipeline;
    let per_image: Vec<Vec<_>> = cfg.pool()?.install(|| {
        pairs
            .par_iter()
            .map(|(img_path, truth_path)| {
                let img = load_image(img_path)?;
                let truth_img = load_image(truth_path)?;
                if (truth_img.width(), truth_img.height()) != (img.width(), img.height()) {
                    return Err(Error::input(
                        truth_path,
                        "truth size differs from the image",
                    ));
                }
                let truth = decode_truth(&truth_img).map_err(|e| Error::input(truth_path, e))?;
                analyze(&img, &p.slic, &p.gmrf)?.training_examples(&truth)
            })
            .collect::<Result<_>>()
    })?;
    let training: Vec<_> = per_image.into_iter().flatten().collect();
    let th = calibrate_thresholds(&training)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_json(out, &th)?;
    Ok(th)
}

/// Segments `inputs` into a session store ready to be served.
pub fn build_store(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    export_on_edit: bool,
) -> Result<SessionStore> {
    let loaded: Vec<_> = cfg.pool()?.install(|| {
        inputs
            .par_iter()
            .map(|path| {
                let img = load_image(path)?;
                let result = segment(&img, &cfg.pipeline, &image_id(path))?;
                Ok((Session::new(result)?, img))
            })
            .collect::<Result<_>>()
    })?;
    let store = SessionStore::new(&cfg.out_dir).export_on_edit(export_on_edit);
    for (session, img) in loaded {
        store.insert(session, img)?;
    }
    Ok(store)
}

/// Serves review sessions for `inputs` until Ctrl-C.
pub fn cmd_serve(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    host: &str,
    port: u16,
    export_on_edit: bool,
) -> Result<()> {
    let store = std::sync::Arc::new(build_store(cfg, inputs, export_on_edit)?);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async {
        let server = ReviewServer::bind(store.clone(), host, port).await?;
        let addr = server.local_addr()?;
        println!(
            "serving {} session(s) at http://{addr}/api/sessions",
            store.len()
        );
        println!("press Ctrl-C to stop; unexported edits are discarded");
        server
            .run(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Segment { run, input } => {
            let out = cmd_segment(&run.to_config()?, &input)?;
            println!(
                "{}: bqi {:.4} over {} superpixels -> {}",
                out.report.image,
                out.report.bqi,
                out.report.k_actual,
                out.paths.report.display()
            );
        }
        Command::Batch { run, input_dir } => {
            let cfg = run.to_config()?;
            let summary = cmd_batch(&cfg, &input_dir)?;
            for e in &summary.images {
                println!("{}: bqi {:.4}", e.image, e.bqi);
            }
            for f in &summary.failures {
                eprintln!("skipped {}: {}", f.image, f.error);
            }
            println!(
                "{} segmented, {} failed -> {}",
                summary.images.len(),
                summary.failures.len(),
                cfg.out_dir.join("batch_summary.json").display()
            );
        }
        Command::Longitudinal { run, manifest, out } => {
            let cfg = run.to_config()?;
            let out = out.unwrap_or_else(|| cfg.out_dir.join("longitudinal.json"));
            let doc = cmd_longitudinal(&cfg, &manifest, &out)?;
            for s in &doc.subjects {
                println!(
                    "{}: {} time points, mean bqi {:.4}",
                    s.subject_id,
                    s.series.len(),
                    s.mean_bqi
                );
            }
        }
        Command::Calibrate {
            run,
            labeled_dir,
            out,
        } => {
            let cfg = run.to_config()?;
            let out = out.unwrap_or_else(|| cfg.out_dir.join("thresholds.json"));
            let th = cmd_calibrate(&cfg, &labeled_dir, &out)?;
            println!(
                "bg_threshold {} kl_threshold {} -> {}",
                th.bg_threshold,
                th.kl_threshold,
                out.display()
            );
        }
        Command::Serve {
            run,
            inputs,
            port,
            host,
            export_on_edit,
        } => cmd_serve(&run.to_config()?, &inputs, &host, port, export_on_edit)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn default_flags() {
        let a = RunArgs::default();
        assert_eq!(a.superpixels, 600);
        assert_eq!(a.compactness, 10.0);
        assert_eq!(a.neighborhood, Neighborhood::Four);
        let cfg = a.to_config().unwrap();
        assert_eq!(cfg.pipeline, PipelineConfig::default());
    }

    #[test]
    fn threshold_flags_and_file() {
        let a = RunArgs::parse_from_flags(&["--bg-threshold", "0.1", "--kl-threshold", "3"]);
        assert_eq!(
            a.to_config().unwrap().pipeline.thresholds,
            Thresholds::new(0.1, 3.0).unwrap()
        );

        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("th.json");
        std::fs::write(&file, r#"{"bg_threshold": 0.2, "kl_threshold": 7.5}"#).unwrap();
        let flag = file.to_str().unwrap();
        let a = RunArgs::parse_from_flags(&["--bg-threshold", "0.1", "--thresholds", flag]);
        assert_eq!(
            a.to_config().unwrap().pipeline.thresholds,
            Thresholds::new(0.2, 7.5).unwrap()
        );
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunArgs::parse_from_flags(&["--jobs", "0"])
            .to_config()
            .is_err());
        assert!(RunArgs::parse_from_flags(&["--superpixels", "0"])
            .to_config()
            .is_err());
        assert!(
            Cli::try_parse_from(["qlfseg", "segment", "--neighborhood", "6", "a.png"]).is_err()
        );
        assert!(Cli::try_parse_from(["qlfseg", "serve"]).is_err());
    }

    #[test]
    fn eight_neighborhood_flag() {
        let a = RunArgs::parse_from_flags(&["--neighborhood", "8"]);
        assert_eq!(a.to_config().unwrap().pipeline.gmrf.dim(), 9);
    }

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        std::fs::write(
            &m,
            "subject_id,timestamp,image_path\nA,2024-01-02,a.png\nB,2024-01-01T10:00:00Z,/abs/b.png\n",
        )
        .unwrap();
        let rows = read_manifest(&m).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].line, 2);
        assert_eq!(rows[0].image_path, dir.path().join("a.png"));
        assert_eq!(rows[1].image_path, Path::new("/abs/b.png"));
    }

    #[test]
    fn manifest_errors_cite_lines() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        let line_of = |text: &str| {
            std::fs::write(&m, text).unwrap();
            match read_manifest(&m) {
                Err(Error::Manifest { line, .. }) => line,
                other => panic!("expected manifest error, got {other:?}"),
            }
        };
        assert_eq!(line_of("subject,timestamp,image_path\n"), 1);
        assert_eq!(
            line_of("subject_id,timestamp,image_path\nA,2024-01-01,a.png\nA,yesterday,b.png\n"),
            3
        );
        assert_eq!(line_of("subject_id,timestamp,image_path\nA,2024-01-01,a.png\nA,2024-01-01T00:00:00Z,b.png\n"), 3);
        assert_eq!(
            line_of("subject_id,timestamp,image_path\nA,2024-01-01\n"),
            2
        );
    }
}
