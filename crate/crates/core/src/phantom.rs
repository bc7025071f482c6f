//! Synthetic QLF-like test images with pixel-exact ground truth.
//!
//! A phantom is a dark background, one rotated elliptical tooth fluorescing
//! pale green, and a handful of red elliptical biofilm blobs clipped to the
//! tooth, all with additive Gaussian noise per channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::color::RgbImage;
use crate::divergence::ClassLabel;
use crate::render::palette;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomParams {
    pub width: usize,
    pub height: usize,
    /// Per-channel noise standard deviation, in `[0, 1]` channel units.
    pub noise_sigma: f64,
    /// Biofilm share of the tooth area; drawn from `[0.05, 0.45]` when unset.
    pub target_coverage: Option<f64>,
}

impl Default for PhantomParams {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            noise_sigma: 0.04,
            target_coverage: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Phantom {
    pub seed: u64,
    pub image: RgbImage,
    pub truth: Vec<ClassLabel>,
    /// Exact ground-truth biofilm / (tooth + biofilm) pixel ratio.
    pub coverage: f64,
}

impl Phantom {
    pub fn truth_image(&self) -> RgbImage {
        let pixels = self.truth.iter().map(|&l| palette(l)).collect();
        RgbImage::new(self.image.width(), self.image.height(), pixels).expect("same shape")
    }

    /// Fraction of pixels whose predicted class matches the ground truth.
    pub fn pixel_accuracy(&self, predicted: &[ClassLabel]) -> f64 {
        let hits = self
            .truth
            .iter()
            .zip(predicted)
            .filter(|(a, b)| a == b)
            .count();
        hits as f64 / self.truth.len() as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    angle: f64,
}

impl Ellipse {
    /// Squared normalized radius; `< 1` inside.
    fn rho2(&self, x: f64, y: f64) -> f64 {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = (dx * c + dy * s) / self.a;
        let v = (-dx * s + dy * c) / self.b;
        u * u + v * v
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.rho2(x, y) < 1.0
    }
}

fn jitter(rng: &mut ChaCha8Rng, base: [f64; 3], spread: f64) -> [f64; 3] {
    base.map(|c| c + rng.random_range(-spread..=spread))
}

pub fn generate(seed: u64, params: &PhantomParams) -> Phantom {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width, params.height);
    let (wf, hf) = (w as f64, h as f64);
    let target = params
        .target_coverage
        .unwrap_or_else(|| rng.random_range(0.05..=0.45));

    let tooth = Ellipse {
        cx: wf * (0.5 + rng.random_range(-0.05..=0.05)),
        cy: hf * (0.5 + rng.random_range(-0.05..=0.05)),
        a: wf * rng.random_range(0.30..=0.40),
        b: hf * rng.random_range(0.30..=0.40),
        angle: rng.random_range(-0.3..=0.3),
    };

    let mut truth = vec![ClassLabel::Background; w * h];
    let mut tooth_area = 0usize;
    for y in 0..h {
        for x in 0..w {
            if tooth.contains(x as f64 + 0.5, y as f64 + 0.5) {
                truth[y * w + x] = ClassLabel::Tooth;
                tooth_area += 1;
            }
        }
    }

    // Grow blobs until the coverage target is met (within one percent).
    let mut biofilm = 0usize;
    let min_radius = 0.025 * wf.min(hf);
    for _ in 0..400 {
        let coverage = biofilm as f64 / tooth_area as f64;
        if coverage >= target - 0.01 {
            break;
        }
        let deficit = (target - coverage) * tooth_area as f64;
        let area = (rng.random_range(0.01..=0.06) * wf * hf).min(deficit * 1.3);
        let aspect: f64 = rng.random_range(0.6..=1.6);
        let a = (area * aspect / std::f64::consts::PI)
            .sqrt()
            .max(min_radius);
        let b = (area / (aspect * std::f64::consts::PI))
            .sqrt()
            .max(min_radius);
        let r = rng.random_range(0.0..=0.8f64).sqrt();
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = tooth.angle.sin_cos();
        let (u, v) = (r * t.cos() * tooth.a, r * t.sin() * tooth.b);
        let blob = Ellipse {
            cx: tooth.cx + u * c - v * s,
            cy: tooth.cy + u * s + v * c,
            a,
            b,
            angle: rng.random_range(0.0..std::f64::consts::PI),
        };

        let x0 = (blob.cx - a.max(b)).floor().max(0.0) as usize;
        let x1 = ((blob.cx + a.max(b)).ceil() as usize).min(w);
        let y0 = (blob.cy - a.max(b)).floor().max(0.0) as usize;
        let y1 = ((blob.cy + a.max(b)).ceil() as usize).min(h);
        let mut added = Vec::new();
        for y in y0..y1 {
            for x in x0..x1 {
                let p = y * w + x;
                if truth[p] == ClassLabel::Tooth && blob.contains(x as f64 + 0.5, y as f64 + 0.5) {
                    added.push(p);
                }
            }
        }
        let next = (biofilm + added.len()) as f64 / tooth_area as f64;
        if added.is_empty() || next > target + 0.01 {
            continue;
        }
        biofilm += added.len();
        for p in added {
            truth[p] = ClassLabel::Biofilm;
        }
    }

    let background = jitter(&mut rng, [0.05, 0.04, 0.07], 0.02);
    let enamel = jitter(&mut rng, [0.59, 0.76, 0.59], 0.04);
    let plaque = jitter(&mut rng, [0.88, 0.18, 0.16], 0.04);
    let noise = Normal::new(0.0, params.noise_sigma).expect("finite sigma");
    let pixels = truth
        .iter()
        .map(|&l| {
            let base = match l {
                ClassLabel::Background => background,
                ClassLabel::Tooth => enamel,
                ClassLabel::Biofilm => plaque,
            };
            base.map(|c| ((c + noise.sample(&mut rng)).clamp(0.0, 1.0) * 255.0).round() as u8)
        })
        .collect();

    Phantom {
        seed,
        image: RgbImage::new(w, h, pixels).expect("generated buffer fits"),
        truth,
        coverage: biofilm as f64 / tooth_area as f64,
    }
}

/// `count` phantoms with consecutive seeds starting at `first_seed`.
pub fn corpus(first_seed: u64, count: usize, params: &PhantomParams) -> Vec<Phantom> {
    (0..count as u64)
        .map(|i| generate(first_seed + i, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PhantomParams {
        PhantomParams {
            width: 160,
            height: 120,
            ..PhantomParams::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(3, &small());
        let b = generate(3, &small());
        assert_eq!(a.image, b.image);
        assert_eq!(a.truth, b.truth);
        assert_ne!(generate(4, &small()).image, a.image);
    }

    #[test]
    fn coverage_is_exact_pixel_ratio() {
        let p = generate(11, &small());
        let bio = p
            .truth
            .iter()
            .filter(|&&l| l == ClassLabel::Biofilm)
            .count();
        let tooth = p.truth.iter().filter(|&&l| l == ClassLabel::Tooth).count();
        assert_eq!(p.coverage, bio as f64 / (bio + tooth) as f64);
    }

    #[test]
    fn hits_requested_coverage() {
        let params = PhantomParams {
            target_coverage: Some(0.30),
            ..PhantomParams::default()
        };
        for seed in 0..5 {
            let p = generate(seed, &params);
            assert!(
                (p.coverage - 0.30).abs() <= 0.011,
                "seed {seed}: {}",
                p.coverage
            );
        }
    }

    #[test]
    fn truth_image_uses_palette() {
        let p = generate(1, &small());
        let img = p.truth_image();
        assert_eq!(crate::render::decode_truth(&img).unwrap(), p.truth);
        assert_eq!(p.pixel_accuracy(&p.truth), 1.0);
    }
}
