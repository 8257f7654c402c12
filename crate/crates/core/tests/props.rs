//! Randomized invariant checks over the library's public surface.

use fundus_core::clahe::clahe;
use fundus_core::dataset::{kfold, largest_remainder, ManifestRecord};
use fundus_core::polar::polar_transform;
use fundus_core::resample::resize_bilinear;
use fundus_core::segment::{
    disc_diameter, pad_bbox, preprocess_sample, rescale_box_to_original, BoundingBox,
    BrightnessBlobSegmenter, Frame, Mask, PreprocessParams, SegmentError, Segmenter,
};
use fundus_core::Raster;
use proptest::prelude::*;

/// Renders a dark field with one bright disc, the generator's core motif.
fn disc_image(w: u32, h: u32, cx: f64, cy: f64, radius: f64, bg: u8, fg: u8) -> Raster {
    let mut img = Raster::filled(w, h, 1, bg);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (f64::from(x) - cx, f64::from(y) - cy);
            if dx * dx + dy * dy <= radius * radius {
                img.set(x, y, 0, fg);
            }
        }
    }
    img
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// All three views come out frame-sized no matter the input geometry.
    #[test]
    fn views_are_frame_sized_for_any_input(
        w in 64u32..4096,
        h in 64u32..4096,
        cx_frac in 0.1f64..0.9,
        cy_frac in 0.1f64..0.9,
        r_frac in 0.02f64..0.3,
        bg in 0u8..60,
        fg in 180u8..=255,
    ) {
        let radius = r_frac * f64::from(w.min(h)) / 2.0;
        let img = disc_image(w, h, cx_frac * f64::from(w), cy_frac * f64::from(h), radius, bg, fg);
        let views = preprocess_sample("p", &img, &BrightnessBlobSegmenter, &PreprocessParams::default())
            .unwrap();
        for view in [&views.original_view, &views.cropped_view, &views.polar_view] {
            prop_assert_eq!((view.width(), view.height()), (256, 256));
        }
    }
}

/// Hands the pipeline a predetermined mask so the fallback rule is testable
/// in isolation.
struct FixedMask(Mask);

impl Segmenter for FixedMask {
    fn segment(&self, _id: &str, _img: &Raster) -> Result<Mask, SegmentError> {
        Ok(self.0.clone())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Fallback engagement is exactly `empty mask or majority mask` once the
    /// original is large enough that mapped crops cannot degenerate.
    #[test]
    fn fallback_rule_is_exact(
        empty in proptest::bool::ANY,
        x in 0u32..255,
        y in 0u32..255,
        w_frac in 0.01f64..1.0,
        h_frac in 0.01f64..1.0,
        orig_w in 64u32..800,
        orig_h in 64u32..800,
    ) {
        let mut mask = Mask::filled(256, 256, false);
        let mut area = 0usize;
        if !empty {
            let bw = ((w_frac * f64::from(256 - x)) as u32).max(1);
            let bh = ((h_frac * f64::from(256 - y)) as u32).max(1);
            for yy in y..y + bh {
                for xx in x..x + bw {
                    mask.set(xx, yy, true);
                }
            }
            area = (bw as usize) * (bh as usize);
        }
        let expected = area == 0 || area as f64 > 0.5 * 256.0 * 256.0;
        let img = Raster::filled(orig_w, orig_h, 1, 100);
        let views =
            preprocess_sample("p", &img, &FixedMask(mask), &PreprocessParams::default()).unwrap();
        prop_assert_eq!(views.used_fallback, expected);
    }

    /// Outward rounding when mapping the padded box to original coordinates
    /// never drops a pixel of the tight disc box.
    #[test]
    fn mapped_crop_retains_every_disc_pixel(
        x in 0u32..255,
        y in 0u32..255,
        w_frac in 0.01f64..1.0,
        h_frac in 0.01f64..1.0,
        orig_w in 64u32..5000,
        orig_h in 64u32..5000,
    ) {
        let w = ((w_frac * f64::from(256 - x)) as u32).max(1);
        let h = ((h_frac * f64::from(256 - y)) as u32).max(1);
        let tight = BoundingBox { x, y, w, h, frame: Frame::Resized256 };
        let padded = pad_bbox(&tight, disc_diameter(&tight));
        let rect = rescale_box_to_original(&padded, 256, orig_w, orig_h);
        let sx = f64::from(orig_w) / 256.0;
        let sy = f64::from(orig_h) / 256.0;
        // The source span of every tight-box pixel, mapped to the original.
        let x0 = (f64::from(x) * sx).floor() as u32;
        let x1 = ((f64::from(x + w) * sx).ceil() as u32).min(orig_w);
        let y0 = (f64::from(y) * sy).floor() as u32;
        let y1 = ((f64::from(y + h) * sy).ceil() as u32).min(orig_h);
        prop_assert!(rect.x <= x0, "left edge: {} > {x0}", rect.x);
        prop_assert!(rect.y <= y0);
        prop_assert!(rect.x + rect.w >= x1, "right edge: {} < {x1}", rect.x + rect.w);
        prop_assert!(rect.y + rect.h >= y1);
    }

    /// Quota property: every allotment is the floor or ceiling of its exact
    /// proportional share, and they sum to the target.
    #[test]
    fn largest_remainder_satisfies_quota(
        weights in proptest::collection::vec(0usize..1_000_000, 1..6),
        target in 0usize..1_000_000,
    ) {
        prop_assume!(weights.iter().sum::<usize>() > 0);
        let total: u128 = weights.iter().map(|&w| w as u128).sum();
        let quotas = largest_remainder(&weights, target);
        prop_assert_eq!(quotas.iter().sum::<usize>(), target);
        for (&q, &w) in quotas.iter().zip(&weights) {
            let floor = (w as u128 * target as u128 / total) as usize;
            prop_assert!(q == floor || q == floor + 1, "quota {q} vs floor {floor}");
        }
    }

    /// Validation shards are disjoint, all exactly `pool / k` in size, and
    /// stratified within one sample per class; the sub-`k` rounding
    /// remainder trains in every fold.
    #[test]
    fn kfold_shards_stratify_within_one(
        n0 in 6usize..300,
        n1 in 6usize..300,
        k in 2u32..6,
        seed in 0u64..1000,
    ) {
        prop_assume!(n0 >= k as usize && n1 >= k as usize);
        let records: Vec<ManifestRecord> = (0..n0 + n1)
            .map(|i| ManifestRecord {
                id: format!("r{i:05}"),
                path: format!("r{i:05}.png"),
                label: u8::from(i < n1),
            })
            .collect();
        let plan = kfold(&records, k, 1.0 / f64::from(k), seed).unwrap();
        let ku = k as usize;
        let val_size = (n0 + n1) / ku;
        let seats = largest_remainder(&[n0, n1], ku * val_size);
        let mut seen = std::collections::BTreeSet::new();
        for fold in 0..k {
            let mut per_class = [0usize; 2];
            for id in plan.val_ids(fold) {
                prop_assert!(seen.insert(id.to_string()), "{id} appears in two shards");
                let idx: usize = id[1..].parse().unwrap();
                per_class[usize::from(records[idx].label)] += 1;
            }
            prop_assert_eq!(per_class[0] + per_class[1], val_size, "fold {} size", fold);
            for (c, &s_c) in seats.iter().enumerate() {
                let got = per_class[c];
                let fl = s_c / ku;
                prop_assert!(
                    got == fl || got == fl + 1,
                    "fold {fold} class {c}: {got} vs {fl}"
                );
            }
        }
        prop_assert_eq!(seen.len(), ku * val_size);
        let leftover = n0 + n1 - ku * val_size;
        prop_assert!(leftover < ku, "leftover {leftover} >= k {ku}");
        let never_val = plan.pool().iter().filter(|(_, f)| f.is_none()).count();
        prop_assert_eq!(never_val, leftover);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Clamped bilinear resampling is a convex combination: outputs stay
    /// inside the input's value range.
    #[test]
    fn resize_respects_value_bounds(
        w in 1u32..48,
        h in 1u32..48,
        out_w in 1u32..96,
        out_h in 1u32..96,
        seed in proptest::num::u64::ANY,
    ) {
        let mut rng = fundus_core::rng::CounterRng::new(seed, 0);
        let samples: Vec<u8> =
            (0..w * h).map(|_| (rng.next_u64() & 0xff) as u8).collect();
        let img = Raster::new(w, h, 1, samples).unwrap();
        let (lo, hi) = img
            .samples()
            .iter()
            .fold((255u8, 0u8), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let out = resize_bilinear(&img, out_w, out_h);
        prop_assert_eq!((out.width(), out.height()), (out_w, out_h));
        for &v in out.samples() {
            prop_assert!(v >= lo && v <= hi, "{v} outside [{lo}, {hi}]");
        }
    }

    /// Constant images are fixed points of contrast equalization and of the
    /// polar warp.
    #[test]
    fn constant_images_are_fixed_points(
        w in 8u32..160,
        h in 8u32..160,
        level in 0u8..=255,
        grid in 1u32..10,
        clip in 0.002f64..1.0,
    ) {
        let img = Raster::filled(w, h, 1, level);
        let eq = clahe(&img, clip, grid);
        prop_assert_eq!(&eq, &img);
        let polar = polar_transform(&img, 64, 64);
        prop_assert!(polar.samples().iter().all(|&v| v == level));
    }
}
