//! Per-superpixel Gauss-Markov random field parameters.
//!
//! Each pixel `p` of a superpixel contributes the sample vector
//! `[f(p), f(p + o_1), ..., f(p + o_m)]` over the neighborhood stencil. The
//! field parameters are the sample mean and (ridge-regularized) sample
//! covariance of those vectors, i.e. the least-squares / maximum-likelihood
//! fit of the Gaussian density to the superpixel.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::ScalarField;
use crate::error::{Error, Result};
use crate::superpixel::SuperpixelMap;

pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Intensity,
    Green,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmrfConfig {
    offsets: Vec<(i32, i32)>,
    ridge: f64,
}

impl Default for GmrfConfig {
    fn default() -> Self {
        Self::four_neighborhood(DEFAULT_RIDGE).expect("default config is valid")
    }
}

impl GmrfConfig {
    pub fn new(offsets: Vec<(i32, i32)>, ridge: f64) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::Parameter("neighborhood must not be empty".into()));
        }
        if offsets.contains(&(0, 0)) {
            return Err(Error::Parameter(
                "neighborhood must not contain (0, 0)".into(),
            ));
        }
        for (i, o) in offsets.iter().enumerate() {
            if offsets[..i].contains(o) {
                return Err(Error::Parameter(format!(
                    "duplicate neighborhood offset {o:?}"
                )));
            }
        }
        if !(ridge > 0.0) || !ridge.is_finite() {
            return Err(Error::Parameter(format!(
                "ridge must be positive, got {ridge}"
            )));
        }
        Ok(Self { offsets, ridge })
    }

    pub fn four_neighborhood(ridge: f64) -> Result<Self> {
        Self::new(vec![(1, 0), (-1, 0), (0, 1), (0, -1)], ridge)
    }

    pub fn eight_neighborhood(ridge: f64) -> Result<Self> {
        Self::new(
            vec![
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (-1, -1),
                (1, -1),
                (-1, 1),
            ],
            ridge,
        )
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Sample vector length: the pixel plus its neighbors.
    pub fn dim(&self) -> usize {
        1 + self.offsets.len()
    }
}

/// Mean and covariance of one superpixel's field.
#[derive(Debug, Clone, PartialEq)]
pub struct GmrfFeature {
    pub superpixel_id: usize,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// Interior samples used; zero marks a degenerate feature.
    pub n_samples: usize,
}

impl GmrfFeature {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.n_samples == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFeatureSet {
    pub channel: Channel,
    pub features: Vec<GmrfFeature>,
}

/// Fills `row` with the stencil at `p`. Fails when a neighbor leaves the
/// image or, given `own`, carries a different superpixel label.
fn stencil_row(
    field: &ScalarField,
    p: usize,
    offsets: &[(i32, i32)],
    own: Option<(&[u32], u32)>,
    row: &mut Vec<f64>,
) -> bool {
    let (w, h) = (field.width() as i64, field.height() as i64);
    let (x, y) = ((p as i64) % w, (p as i64) / w);
    row.clear();
    row.push(field.values()[p]);
    for &(dx, dy) in offsets {
        let (nx, ny) = (x + dx as i64, y + dy as i64);
        if nx < 0 || ny < 0 || nx >= w || ny >= h {
            return false;
        }
        let q = (ny * w + nx) as usize;
        if let Some((labels, sp)) = own {
            if labels[q] != sp {
                return false;
            }
        }
        row.push(field.values()[q]);
    }
    true
}

fn collect_rows(
    field: &ScalarField,
    pixels: &[usize],
    offsets: &[(i32, i32)],
    own: Option<(&[u32], u32)>,
    d: usize,
) -> Vec<f64> {
    let mut data = Vec::with_capacity(pixels.len() * d);
    let mut row = Vec::with_capacity(d);
    for &p in pixels {
        if stencil_row(field, p, offsets, own, &mut row) {
            data.extend_from_slice(&row);
        }
    }
    data
}

fn samples_for_pixels(
    field: &ScalarField,
    map: &SuperpixelMap,
    sp: usize,
    pixels: &[usize],
    cfg: &GmrfConfig,
) -> DMatrix<f64> {
    let d = cfg.dim();
    let mut data = collect_rows(
        field,
        pixels,
        &cfg.offsets,
        Some((map.labels(), sp as u32)),
        d,
    );
    if data.is_empty() {
        data = collect_rows(field, pixels, &cfg.offsets, None, d);
    }
    DMatrix::from_row_slice(data.len() / d, d, &data)
}

/// Sample matrix (`n_samples x d`) of superpixel `sp`.
///
/// Only pixels whose whole stencil lies inside the image and inside `sp`
/// contribute. Stencils straddling a boundary mix two tissues and would
/// blur the texture of small superpixels. When no pixel qualifies (thin
/// or tiny superpixels), any in-image stencil is accepted instead.
pub fn extract_samples(
    field: &ScalarField,
    map: &SuperpixelMap,
    sp: usize,
    cfg: &GmrfConfig,
) -> Result<DMatrix<f64>> {
    if sp >= map.len() {
        return Err(Error::UnknownSuperpixel(sp));
    }
    let pixels: Vec<usize> = map
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l as usize == sp)
        .map(|(p, _)| p)
        .collect();
    Ok(samples_for_pixels(field, map, sp, &pixels, cfg))
}

/// Column means and unbiased covariance plus `ridge * I`.
pub fn estimate_gmrf(samples: &DMatrix<f64>, cfg: &GmrfConfig, sp: usize) -> Result<GmrfFeature> {
    let d = cfg.dim();
    if samples.ncols() != d {
        return Err(Error::Internal(format!(
            "sample matrix has {} columns, neighborhood needs {d}",
            samples.ncols()
        )));
    }
    let n = samples.nrows();
    let mut covariance = DMatrix::<f64>::identity(d, d) * cfg.ridge;
    if n == 0 {
        return Ok(GmrfFeature {
            superpixel_id: sp,
            mean: DVector::zeros(d),
            covariance,
            n_samples: 0,
        });
    }

    let mean = DVector::from_iterator(d, samples.column_iter().map(|c| c.mean()));
    if n >= 2 {
        let centered = DMatrix::from_fn(n, d, |r, c| samples[(r, c)] - mean[c]);
        let scatter = centered.transpose() * &centered;
        let denom = (n - 1) as f64;
        for i in 0..d {
            for j in i..d {
                let v = scatter[(i, j)] / denom;
                covariance[(i, j)] += v;
                if i != j {
                    covariance[(j, i)] += v;
                }
            }
        }
    }
    Ok(GmrfFeature {
        superpixel_id: sp,
        mean,
        covariance,
        n_samples: n,
    })
}

/// One feature per superpixel, computed independently (in parallel).
pub fn estimate_all(
    field: &ScalarField,
    map: &SuperpixelMap,
    cfg: &GmrfConfig,
    channel: Channel,
) -> Result<ChannelFeatureSet> {
    if (field.width(), field.height()) != (map.width(), map.height()) {
        return Err(Error::Internal(format!(
            "field is {}x{} but superpixel map is {}x{}",
            field.width(),
            field.height(),
            map.width(),
            map.height()
        )));
    }
    let members = map.members();
    let features = members
        .par_iter()
        .enumerate()
        .map(|(sp, pixels)| {
            estimate_gmrf(&samples_for_pixels(field, map, sp, pixels, cfg), cfg, sp)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelFeatureSet { channel, features })
}
