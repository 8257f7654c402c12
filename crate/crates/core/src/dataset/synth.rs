//! Synthetic fundus-like image generation for desk-scale experiments.
//!
//! Each image is a dark, vignetted background with one bright disc blob and
//! a brighter inner cup blob; the cup-to-disc ratio is drawn from
//! label-dependent distributions, so the referable class is recognizable by
//! a larger bright core — the same geometric cue a screening model would
//! exploit. Disc position, size, an occasional distractor blob, and pixel
//! noise are nuisance factors that hit the three pipeline views differently.

use crate::raster::{quantize, Raster};
use crate::rng::{mix, stream, CounterRng};
use alloc::vec::Vec;

/// Appearance knobs for one synthetic domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Appearance {
    /// Disc radius range as a fraction of the image side.
    pub disc_radius_frac: (f64, f64),
    /// Max disc-center offset from the image center, fraction of the side.
    pub center_jitter_frac: f64,
    /// Mean cup-to-disc ratio per label (label 0, label 1).
    pub cdr_mean: (f64, f64),
    pub cdr_sd: f64,
    /// Background level before vignetting.
    pub background: f64,
    /// Brightness added inside the disc.
    pub disc_level: f64,
    /// Extra brightness added inside the cup.
    pub cup_boost: f64,
    pub noise_sd: f64,
    /// Probability of one bright distractor blob away from the disc.
    pub distractor_prob: f64,
    /// Quadratic background falloff strength toward the corners.
    pub vignette: f64,
    /// Per-image exposure gain range; scales everything except sensor noise.
    pub gain_range: (f64, f64),
}

impl Appearance {
    /// Default domain: small-to-medium discs, strong vignette, clutter.
    pub fn standard() -> Self {
        Self {
            disc_radius_frac: (0.19, 0.25),
            center_jitter_frac: 0.05,
            cdr_mean: (0.38, 0.60),
            cdr_sd: 0.07,
            background: 26.0,
            disc_level: 140.0,
            cup_boost: 55.0,
            noise_sd: 7.0,
            distractor_prob: 0.15,
            vignette: 0.35,
            gain_range: (1.0, 1.0),
        }
    }

    /// Shifted acquisition domain: brighter field with inverted shading
    /// (edges brighter than the center), wide per-image exposure swings, a
    /// noisier sensor, and looser centering — the appearance gap a model
    /// must be fine-tuned across.
    pub fn shifted() -> Self {
        Self {
            disc_radius_frac: (0.19, 0.25),
            center_jitter_frac: 0.10,
            cdr_mean: (0.38, 0.60),
            cdr_sd: 0.07,
            background: 40.0,
            disc_level: 90.0,
            cup_boost: 45.0,
            noise_sd: 8.0,
            distractor_prob: 0.10,
            vignette: -0.50,
            gain_range: (0.60, 1.30),
        }
    }
}

/// Full generator configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    /// class-0 : class-1 ratio; 9.0 means nine normals per referable case.
    pub imbalance_ratio: f64,
    pub image_size: u32,
    pub seed: u64,
    pub appearance: Appearance,
}

impl SynthConfig {
    pub fn new(n: usize, imbalance_ratio: f64, image_size: u32, seed: u64) -> Self {
        assert!(n >= 2, "need at least two samples, one per class");
        assert!(imbalance_ratio > 0.0 && imbalance_ratio.is_finite());
        assert!(image_size >= 32, "images below 32 px have no room for a disc");
        Self { n, imbalance_ratio, image_size, seed, appearance: Appearance::standard() }
    }

    pub fn with_appearance(mut self, appearance: Appearance) -> Self {
        self.appearance = appearance;
        self
    }
}

/// Label sequence: exact largest-remainder class quotas (clamped so both
/// classes appear), shuffled by the seed.
pub fn plan_labels(cfg: &SynthConfig) -> Vec<u8> {
    let ideal = cfg.n as f64 / (1.0 + cfg.imbalance_ratio);
    let n1 = (libm::floor(ideal + 0.5) as usize).clamp(1, cfg.n - 1);
    let mut labels = Vec::with_capacity(cfg.n);
    labels.resize(n1, 1u8);
    labels.resize(cfg.n, 0u8);
    CounterRng::named(cfg.seed, "synth-labels").shuffle(&mut labels);
    labels
}

/// A soft-edged bright blob.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Blob {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub level: f64,
}

/// The analytic scene for one sample — the ground truth behind the pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scene {
    pub disc: Blob,
    pub cup: Blob,
    pub cdr: f64,
    pub distractor: Option<Blob>,
    /// Exposure gain applied to everything except sensor noise.
    pub gain: f64,
}

/// Draws the scene parameters for sample `index`; pure in
/// `(seed, index, label)`.
pub fn sample_scene(cfg: &SynthConfig, index: u64, label: u8) -> Scene {
    let a = &cfg.appearance;
    let s = f64::from(cfg.image_size);
    let mut rng = CounterRng::new(cfg.seed, stream("synth-scene") ^ mix(index));
    let jitter = a.center_jitter_frac * s;
    let cx = s / 2.0 + jitter * (2.0 * rng.next_f64() - 1.0);
    let cy = s / 2.0 + jitter * (2.0 * rng.next_f64() - 1.0);
    let disc_r = s * rng.next_range(a.disc_radius_frac.0, a.disc_radius_frac.1);
    let mean = if label == 1 { a.cdr_mean.1 } else { a.cdr_mean.0 };
    let cdr = (mean + a.cdr_sd * rng.next_gaussian()).clamp(0.15, 0.85);
    let cup_r = cdr * disc_r;
    // The cup sits near-concentric with a little wander.
    let wander = 0.08 * disc_r;
    let cup_cx = cx + wander * (2.0 * rng.next_f64() - 1.0);
    let cup_cy = cy + wander * (2.0 * rng.next_f64() - 1.0);
    let distractor = if rng.next_f64() < a.distractor_prob {
        let angle = rng.next_range(0.0, core::f64::consts::TAU);
        let dist = rng.next_range(0.58, 0.82) * s / 2.0;
        let r = s * rng.next_range(0.04, 0.09);
        let level = a.disc_level * rng.next_range(0.5, 0.85);
        Some(Blob {
            cx: s / 2.0 + dist * libm::cos(angle),
            cy: s / 2.0 + dist * libm::sin(angle),
            r,
            level,
        })
    } else {
        None
    };
    let gain = rng.next_range(a.gain_range.0, a.gain_range.1);
    Scene {
        disc: Blob { cx, cy, r: disc_r, level: a.disc_level },
        cup: Blob { cx: cup_cx, cy: cup_cy, r: cup_r, level: a.cup_boost },
        cdr,
        distractor,
        gain,
    }
}

/// Soft blob membership: 1 inside, 0 outside, linear over a ~1.5 px edge.
#[inline]
fn soft(dist: f64, radius: f64) -> f64 {
    ((radius - dist) / 1.5 + 0.5).clamp(0.0, 1.0)
}

/// Renders sample `index`; byte-deterministic in `(cfg, index, label)`.
pub fn render(cfg: &SynthConfig, index: u64, label: u8) -> Raster {
    let scene = sample_scene(cfg, index, label);
    let a = &cfg.appearance;
    let s = f64::from(cfg.image_size);
    let half = s / 2.0;
    let mut noise = CounterRng::new(cfg.seed, stream("synth-noise") ^ mix(index));
    let mut samples = Vec::with_capacity((cfg.image_size * cfg.image_size) as usize);
    for y in 0..cfg.image_size {
        for x in 0..cfg.image_size {
            let (fx, fy) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
            let rho2 = ((fx - half) * (fx - half) + (fy - half) * (fy - half)) / (half * half);
            let mut v = a.background * (1.0 - a.vignette * rho2.min(1.0));
            v += scene.disc.level * soft(libm::hypot(fx - scene.disc.cx, fy - scene.disc.cy), scene.disc.r);
            v += scene.cup.level * soft(libm::hypot(fx - scene.cup.cx, fy - scene.cup.cy), scene.cup.r);
            if let Some(b) = scene.distractor {
                v += b.level * soft(libm::hypot(fx - b.cx, fy - b.cy), b.r);
            }
            v = scene.gain * v + a.noise_sd * noise.next_gaussian();
            samples.push(quantize(v));
        }
    }
    Raster::new(cfg.image_size, cfg.image_size, 1, samples).expect("synth: valid dims")
}
