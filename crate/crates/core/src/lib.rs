//! Semi-automated biofilm quantification for quantitative light-induced
//! fluorescence (QLF) dental images.
//!
//! The automatic stage oversegments the HSI intensity channel into
//! superpixels, fits a Gaussian random field to every superpixel in both the
//! intensity and green channels, and labels each superpixel as background,
//! tooth or biofilm from the divergence between the two fits. The biofilm
//! quantification index (BQI) is the biofilm share of the tooth area.
//!
//! A review [`session`] lets a grader fix misclassified superpixels with
//! single clicks, and [`service`] exposes sessions to a browser over HTTP.
//!
//! ```no_run
//! use qlfseg::{color, pipeline};
//!
//! let img = color::load_image("jaw.png")?;
//! let result = pipeline::segment(&img, &pipeline::PipelineConfig::default(), "jaw")?;
//! println!("BQI {:.3}", result.report.bqi);
//! # Ok::<(), qlfseg::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod color;
pub mod divergence;
mod error;
pub mod gmrf;
pub mod output;
pub mod phantom;
pub mod pipeline;
pub mod quant;
pub mod render;
pub mod service;
pub mod session;
pub mod superpixel;

pub use error::{Error, Result};
