//! Stochastic training-time augmentation: random scaling, rotation, and
//! flips, drawn deterministically per `(policy seed, sample index)` so any
//! epoch schedule can be replayed exactly.

use crate::raster::Raster;
use crate::resample::{flip_horizontal, flip_vertical, rotate, scale_about_center};
use crate::rng::CounterRng;

/// Augmentation parameters. `rotation_deg` bounds a symmetric uniform angle
/// draw in `[-rotation_deg, +rotation_deg]`; `scale_range` is a uniform
/// factor draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentPolicy {
    pub hflip_prob: f64,
    pub vflip_prob: f64,
    pub rotation_deg: f64,
    pub scale_range: (f64, f64),
    pub seed: u64,
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        Self {
            hflip_prob: 0.5,
            vflip_prob: 0.5,
            rotation_deg: 10.0,
            scale_range: (0.9, 1.1),
            seed: 0,
        }
    }
}

impl AugmentPolicy {
    /// Policy that leaves every image untouched.
    pub fn identity(seed: u64) -> Self {
        Self { hflip_prob: 0.0, vflip_prob: 0.0, rotation_deg: 0.0, scale_range: (1.0, 1.0), seed }
    }

    pub fn is_identity(&self) -> bool {
        self.hflip_prob == 0.0
            && self.vflip_prob == 0.0
            && self.rotation_deg == 0.0
            && self.scale_range == (1.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.hflip_prob) || !prob(self.vflip_prob) {
            return Err(AugmentError::BadProbability);
        }
        if !(self.rotation_deg >= 0.0) {
            return Err(AugmentError::BadRotation);
        }
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(AugmentError::BadScaleRange);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AugmentError {
    BadProbability,
    BadRotation,
    BadScaleRange,
}

impl core::fmt::Display for AugmentError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BadProbability => write!(f, "flip probabilities must be in [0, 1]"),
            Self::BadRotation => write!(f, "rotation bound must be >= 0"),
            Self::BadScaleRange => write!(f, "scale range must be positive and ordered"),
        }
    }
}

impl core::error::Error for AugmentError {}

/// Concrete parameters drawn for one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentDraw {
    pub hflip: bool,
    pub vflip: bool,
    pub degrees: f64,
    pub scale: f64,
}

/// The deterministic draw for `sample_index` under `policy`. Four uniforms
/// are always consumed, so the stream layout does not depend on the policy.
pub fn draw(policy: &AugmentPolicy, sample_index: u64) -> AugmentDraw {
    let mut rng = CounterRng::new(policy.seed, sample_index);
    let u_h = rng.next_f64();
    let u_v = rng.next_f64();
    let u_rot = rng.next_f64();
    let u_scale = rng.next_f64();
    AugmentDraw {
        hflip: u_h < policy.hflip_prob,
        vflip: u_v < policy.vflip_prob,
        degrees: policy.rotation_deg * (2.0 * u_rot - 1.0),
        scale: policy.scale_range.0 + (policy.scale_range.1 - policy.scale_range.0) * u_scale,
    }
}

/// Applies the drawn scale, then rotation, then flips. Draws that are exact
/// identities (angle 0, factor 1, flip not taken) skip the resampling pass.
pub fn augment(img: &Raster, policy: &AugmentPolicy, sample_index: u64) -> Raster {
    let d = draw(policy, sample_index);
    let mut out = if d.scale != 1.0 { scale_about_center(img, d.scale) } else { img.clone() };
    if d.degrees != 0.0 {
        out = rotate(&out, d.degrees);
    }
    if d.hflip {
        out = flip_horizontal(&out);
    }
    if d.vflip {
        out = flip_vertical(&out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn probe() -> Raster {
        let samples: Vec<u8> = (0..24 * 24).map(|i| (i * 11 % 251) as u8).collect();
        Raster::new(24, 24, 1, samples).unwrap()
    }

    #[test]
    fn identity_policy_returns_the_input() {
        let img = probe();
        let policy = AugmentPolicy::identity(3);
        for idx in 0..4 {
            assert_eq!(augment(&img, &policy, idx), img);
        }
    }

    #[test]
    fn same_seed_and_index_reproduce_exactly() {
        let img = probe();
        let policy = AugmentPolicy { seed: 77, ..AugmentPolicy::default() };
        assert_eq!(augment(&img, &policy, 5), augment(&img, &policy, 5));
        assert_eq!(draw(&policy, 9), draw(&policy, 9));
    }

    #[test]
    fn different_indices_give_different_draws() {
        let policy = AugmentPolicy { seed: 1, ..AugmentPolicy::default() };
        let draws: Vec<AugmentDraw> = (0..8).map(|i| draw(&policy, i)).collect();
        assert!(draws.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn flip_rate_tracks_the_probability() {
        let policy = AugmentPolicy { seed: 4, ..AugmentPolicy::default() };
        let flips = (0..10_000).filter(|&i| draw(&policy, i).hflip).count();
        let rate = flips as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&rate), "hflip rate {rate}");
    }

    #[test]
    fn draws_respect_policy_bounds() {
        let policy = AugmentPolicy {
            rotation_deg: 10.0,
            scale_range: (0.8, 1.2),
            seed: 6,
            ..AugmentPolicy::default()
        };
        for i in 0..1_000 {
            let d = draw(&policy, i);
            assert!(d.degrees >= -10.0 && d.degrees <= 10.0);
            assert!(d.scale >= 0.8 && d.scale < 1.2);
        }
    }

    #[test]
    fn pure_flip_draw_matches_direct_flip() {
        let img = probe();
        let policy = AugmentPolicy {
            hflip_prob: 1.0,
            vflip_prob: 0.0,
            rotation_deg: 0.0,
            scale_range: (1.0, 1.0),
            seed: 0,
        };
        assert_eq!(augment(&img, &policy, 0), crate::resample::flip_horizontal(&img));
    }

    #[test]
    fn validate_rejects_bad_policies() {
        let mut p = AugmentPolicy::default();
        p.hflip_prob = 1.5;
        assert_eq!(p.validate(), Err(AugmentError::BadProbability));
        let mut p = AugmentPolicy::default();
        p.scale_range = (0.0, 1.0);
        assert_eq!(p.validate(), Err(AugmentError::BadScaleRange));
        let mut p = AugmentPolicy::default();
        p.rotation_deg = -1.0;
        assert_eq!(p.validate(), Err(AugmentError::BadRotation));
        assert!(AugmentPolicy::default().validate().is_ok());
    }
}
