//! Simple linear iterative clustering over a scalar intensity field.
//!
//! Clustering happens in `(v, x, y)` space. Pixel `(px, py)` sits at the
//! continuous position `(px + 0.5, py + 0.5)`, so a grid of `n` seeds over
//! `w` columns lands exactly on the cell centers `w / n * (i + 0.5)`.

mod connectivity;

pub use connectivity::enforce_connectivity;

use crate::color::ScalarField;
use crate::error::{Error, Result};

/// Intensity differences are measured on a 0-100 scale (the range of CIE L*)
/// so that compactness values carry their usual meaning.
pub const INTENSITY_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicParams {
    /// Requested superpixel count.
    pub k: usize,
    /// Weight of the spatial term relative to intensity.
    pub compactness: f64,
    pub max_iters: usize,
    /// Stop once the L2 shift of all centers drops to this value.
    pub convergence_eps: f64,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            k: 600,
            compactness: 10.0,
            max_iters: 10,
            convergence_eps: 1e-4,
        }
    }
}

impl SlicParams {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        self.check()?;
        if self.k > width * height {
            return Err(Error::Parameter(format!(
                "superpixel count {} exceeds pixel count {}",
                self.k,
                width * height
            )));
        }
        Ok(())
    }

    /// The checks of [`validate`](Self::validate) that do not depend on the
    /// image size.
    pub fn check(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter(
                "superpixel count must be at least 1".into(),
            ));
        }
        if !(self.compactness > 0.0) || !self.compactness.is_finite() {
            return Err(Error::Parameter(format!(
                "compactness must be positive, got {}",
                self.compactness
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        if !(self.convergence_eps >= 0.0) {
            return Err(Error::Parameter(format!(
                "convergence_eps must be non-negative, got {}",
                self.convergence_eps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterCenter {
    pub v: f64,
    pub x: f64,
    pub y: f64,
}

/// Dense per-pixel superpixel labels plus one center per label.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    centers: Vec<ClusterCenter>,
    grid_interval: f64,
}

impl SuperpixelMap {
    /// Builds a map from a dense label buffer. Center positions are the
    /// member centroids; center intensities start at zero (see
    /// [`SuperpixelMap::refresh_centers`]).
    pub fn from_labels(
        width: usize,
        height: usize,
        labels: Vec<u32>,
        grid_interval: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width * height {
            return Err(Error::Parameter(format!(
                "label buffer of {} entries does not fit {width}x{height}",
                labels.len()
            )));
        }
        let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut seen = vec![false; count];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Parameter(format!(
                "superpixel labels are not dense: id {missing} has no pixels"
            )));
        }
        let centers = vec![
            ClusterCenter {
                v: 0.0,
                x: 0.0,
                y: 0.0
            };
            count
        ];
        let mut map = Self {
            width,
            height,
            labels,
            centers,
            grid_interval,
        };
        map.recompute_positions();
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn centers(&self) -> &[ClusterCenter] {
        &self.centers
    }

    /// Number of superpixels, `K`.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn grid_interval(&self) -> f64 {
        self.grid_interval
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel indices of every superpixel, bucketed by label.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (p, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(p);
        }
        out
    }

    /// Resets each center to the mean `(v, x, y)` of its member pixels.
    pub fn refresh_centers(&mut self, field: &ScalarField) {
        self.recompute_positions();
        let mut sums = vec![(0.0f64, 0usize); self.len()];
        for (&l, &v) in self.labels.iter().zip(field.values()) {
            let e = &mut sums[l as usize];
            e.0 += v;
            e.1 += 1;
        }
        for (c, (sum, n)) in self.centers.iter_mut().zip(sums) {
            if n > 0 {
                c.v = sum / n as f64;
            }
        }
    }

    fn recompute_positions(&mut self) {
        let mut sums = vec![(0.0f64, 0.0f64, 0usize); self.len()];
        for (p, &l) in self.labels.iter().enumerate() {
            let e = &mut sums[l as usize];
            e.0 += (p % self.width) as f64 + 0.5;
            e.1 += (p / self.width) as f64 + 0.5;
            e.2 += 1;
        }
        for (c, (sx, sy, n)) in self.centers.iter_mut().zip(sums) {
            if n > 0 {
                c.x = sx / n as f64;
                c.y = sy / n as f64;
            }
        }
    }
}

/// Grid interval `S = sqrt(pixels / k)`.
pub fn compute_grid_interval(width: usize, height: usize, k: usize) -> Result<f64> {
    let n = width * height;
    if k == 0 || k > n {
        return Err(Error::Parameter(format!(
            "superpixel count {k} must be in [1, {n}]"
        )));
    }
    Ok((n as f64 / k as f64).sqrt())
}

/// Seed grid dimensions `(nx, ny)`: the grid whose cell count is closest to
/// `k` while keeping cells near-square. Wider grids win ties.
fn grid_shape(width: usize, height: usize, k: usize) -> (usize, usize) {
    let mut best = (f64::INFINITY, 1, 1);
    for nx in 1..=width.min(k) {
        let approx = k as f64 / nx as f64;
        for ny in [approx.floor(), approx.ceil()] {
            let ny = (ny as usize).clamp(1, height);
            let count_err = (nx * ny).abs_diff(k) as f64 / k as f64;
            let aspect = ((width as f64 / nx as f64) / (height as f64 / ny as f64))
                .ln()
                .abs();
            let cost = count_err + 0.5 * aspect;
            if cost <= best.0 + 1e-12 {
                best = (cost, nx, ny);
            }
        }
    }
    (best.1, best.2)
}

fn gradient(field: &ScalarField, x: usize, y: usize) -> f64 {
    let (w, h) = (field.width(), field.height());
    let at = |x: usize, y: usize| field.get(x, y);
    let dx = at((x + 1).min(w - 1), y) - at(x.saturating_sub(1), y);
    let dy = at(x, (y + 1).min(h - 1)) - at(x, y.saturating_sub(1));
    dx * dx + dy * dy
}

/// Places seeds on a regular grid of spacing ~`S`, then nudges each one to
/// the lowest-gradient pixel of its 3x3 neighborhood so no seed starts on an
/// edge. A seed only moves when a neighbor is strictly smoother.
pub fn seed_clusters(field: &ScalarField, params: &SlicParams) -> Result<Vec<ClusterCenter>> {
    let (w, h) = (field.width(), field.height());
    params.validate(w, h)?;
    let (nx, ny) = grid_shape(w, h, params.k);
    let (step_x, step_y) = (w as f64 / nx as f64, h as f64 / ny as f64);

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let mut x = step_x * (i as f64 + 0.5);
            let mut y = step_y * (j as f64 + 0.5);
            let (px, py) = ((x as usize).min(w - 1), (y as usize).min(h - 1));

            let mut best = (gradient(field, px, py), px, py);
            for ny_ in py.saturating_sub(1)..=(py + 1).min(h - 1) {
                for nx_ in px.saturating_sub(1)..=(px + 1).min(w - 1) {
                    let g = gradient(field, nx_, ny_);
                    if g < best.0 {
                        best = (g, nx_, ny_);
                    }
                }
            }
            if (best.1, best.2) != (px, py) {
                x = best.1 as f64 + 0.5;
                y = best.2 as f64 + 0.5;
            }
            centers.push(ClusterCenter {
                v: field.get(best.1, best.2),
                x,
                y,
            });
        }
    }
    Ok(centers)
}

const UNASSIGNED: u32 = u32::MAX;

/// Squared combined distance between a pixel and a center.
#[inline]
fn distance_sq(c: &ClusterCenter, v: f64, x: f64, y: f64, spatial_weight: f64) -> f64 {
    let dv = (v - c.v) * INTENSITY_SCALE;
    let dx = x - c.x;
    let dy = y - c.y;
    dv * dv + (dx * dx + dy * dy) * spatial_weight
}

fn assign(
    field: &ScalarField,
    centers: &[ClusterCenter],
    s: f64,
    spatial_weight: f64,
    labels: &mut [u32],
    dist: &mut [f64],
) {
    let (w, h) = (field.width(), field.height());
    labels.fill(UNASSIGNED);
    dist.fill(f64::INFINITY);

    for (ci, c) in centers.iter().enumerate() {
        // Pixel centers inside [c - S, c + S] on both axes.
        let x0 = (c.x - s - 0.5).ceil().max(0.0) as usize;
        let x1 = ((c.x + s - 0.5).floor().max(-1.0) + 1.0).min(w as f64) as usize;
        let y0 = (c.y - s - 0.5).ceil().max(0.0) as usize;
        let y1 = ((c.y + s - 0.5).floor().max(-1.0) + 1.0).min(h as f64) as usize;
        for py in y0..y1 {
            let row = py * w;
            let fy = py as f64 + 0.5;
            for px in x0..x1 {
                let p = row + px;
                let d = distance_sq(c, field.values()[p], px as f64 + 0.5, fy, spatial_weight);
                if d < dist[p] {
                    dist[p] = d;
                    labels[p] = ci as u32;
                }
            }
        }
    }

    for p in 0..labels.len() {
        if labels[p] != UNASSIGNED {
            continue;
        }
        let (fx, fy) = ((p % w) as f64 + 0.5, (p / w) as f64 + 0.5);
        let v = field.values()[p];
        let mut best = (f64::INFINITY, 0u32);
        for (ci, c) in centers.iter().enumerate() {
            let d = distance_sq(c, v, fx, fy, spatial_weight);
            if d < best.0 {
                best = (d, ci as u32);
            }
        }
        labels[p] = best.1;
        dist[p] = best.0;
    }
}

/// Moves every center to the mean of its members and returns the L2
/// residual between the old and new center sets, in combined distance units.
fn update(
    field: &ScalarField,
    labels: &[u32],
    centers: &mut [ClusterCenter],
    spatial_weight: f64,
) -> f64 {
    let w = field.width();
    let mut sums = vec![(0.0f64, 0.0f64, 0.0f64, 0usize); centers.len()];
    for (p, (&l, &v)) in labels.iter().zip(field.values()).enumerate() {
        let e = &mut sums[l as usize];
        e.0 += v;
        e.1 += (p % w) as f64 + 0.5;
        e.2 += (p / w) as f64 + 0.5;
        e.3 += 1;
    }
    let mut residual = 0.0;
    for (c, (sv, sx, sy, n)) in centers.iter_mut().zip(sums) {
        if n == 0 {
            continue;
        }
        let n = n as f64;
        let next = ClusterCenter {
            v: sv / n,
            x: sx / n,
            y: sy / n,
        };
        residual += distance_sq(c, next.v, next.x, next.y, spatial_weight);
        *c = next;
    }
    residual.sqrt()
}

/// Outcome of the clustering loop, exposed for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicStats {
    pub iterations: usize,
    pub final_residual: f64,
}

/// Full SLIC: seeding, assign/update until convergence, connectivity
/// enforcement. Deterministic for fixed inputs.
pub fn slic_segment(field: &ScalarField, params: &SlicParams) -> Result<SuperpixelMap> {
    slic_segment_with_stats(field, params).map(|(m, _)| m)
}

pub fn slic_segment_with_stats(
    field: &ScalarField,
    params: &SlicParams,
) -> Result<(SuperpixelMap, SlicStats)> {
    let (w, h) = (field.width(), field.height());
    params.validate(w, h)?;
    let s = compute_grid_interval(w, h, params.k)?;
    let spatial_weight = (params.compactness / s).powi(2);

    let mut centers = seed_clusters(field, params)?;
    let mut labels = vec![UNASSIGNED; w * h];
    let mut dist = vec![f64::INFINITY; w * h];

    let mut stats = SlicStats {
        iterations: 0,
        final_residual: f64::INFINITY,
    };
    for _ in 0..params.max_iters {
        assign(field, &centers, s, spatial_weight, &mut labels, &mut dist);
        let residual = update(field, &labels, &mut centers, spatial_weight);
        stats.iterations += 1;
        stats.final_residual = residual;
        if residual <= params.convergence_eps {
            break;
        }
    }

    let raw = SuperpixelMap {
        width: w,
        height: h,
        labels,
        centers,
        grid_interval: s,
    };
    let mut map = enforce_connectivity(&raw);
    map.refresh_centers(field);
    Ok((map, stats))
}
