//! Optic-disc localization and the view-producing preprocessing pipeline:
//! resize to the working frame, CLAHE, disc segmentation, tight bounding box
//! with proportional padding, crop of the full-resolution original, and the
//! polar unwrap — with a center-crop fallback whenever segmentation is
//! unusable.

use crate::clahe::clahe;
use crate::polar::polar_transform;
use crate::raster::{Raster, RasterError};
use crate::resample::{center_crop, resize_bilinear};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Binary segmentation mask; `true` marks disc pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyDimensions);
        }
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(RasterError::BadLength { expected, actual: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self::new(width, height, vec![value; width as usize * height as usize])
            .expect("filled: valid dims")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    /// Number of true pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Coordinate space a bounding box lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// The segmentation working frame (the resized 256x256 grid).
    Resized256,
    /// The full-resolution original image.
    Original,
}

/// Axis-aligned box, tagged with its coordinate space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub frame: Frame,
}

/// Segmentation failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentError {
    /// Input image does not match the segmenter's expected dimensions.
    BadDimensions { width: u32, height: u32 },
    /// Mask dimensions disagree with the working frame.
    MaskDimensions { width: u32, height: u32 },
    /// A plug-in segmenter could not produce a mask for this sample.
    External(String),
}

impl core::fmt::Display for SegmentError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BadDimensions { width, height } => {
                write!(f, "segmenter expects a 256x256 input, got {width}x{height}")
            }
            Self::MaskDimensions { width, height } => {
                write!(f, "mask dimensions {width}x{height} do not match the working frame")
            }
            Self::External(msg) => write!(f, "segmenter failed: {msg}"),
        }
    }
}

impl core::error::Error for SegmentError {}

/// Produces a disc mask for a sample. Implementations must be safe for
/// concurrent read-only use; the sample id lets file-backed implementations
/// look up precomputed masks.
pub trait Segmenter: Sync {
    fn segment(&self, id: &str, img256: &Raster) -> Result<Mask, SegmentError>;
}

/// One 4-connected region of a mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Component {
    /// Raster-scan discovery index, starting at 0.
    pub label: u32,
    pub area: usize,
    pub bbox: BoundingBox,
}

/// Labels 4-connected components in raster-scan discovery order. Returns the
/// per-pixel label grid (`u32::MAX` = background) and the component list.
pub fn label_components(mask: &Mask) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut labels = vec![u32::MAX; w * h];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != u32::MAX {
            continue;
        }
        let label = components.len() as u32;
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (w, h, 0usize, 0usize);
        let mut area = 0usize;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            area += 1;
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            let mut visit = |j: usize| {
                if mask.bits()[j] && labels[j] == u32::MAX {
                    labels[j] = label;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        components.push(Component {
            label,
            area,
            bbox: BoundingBox {
                x: min_x as u32,
                y: min_y as u32,
                w: (max_x - min_x + 1) as u32,
                h: (max_y - min_y + 1) as u32,
                frame: Frame::Resized256,
            },
        });
    }
    (labels, components)
}

/// 4-connected components in raster-scan discovery order.
pub fn connected_components(mask: &Mask) -> Vec<Component> {
    label_components(mask).1
}

/// Built-in fallback segmenter: threshold the luminance channel at its 99th
/// percentile (nearest-rank) and keep the largest 4-connected component.
/// Pixels at the global minimum never pass, so flat images yield an empty
/// mask. Stands in where a pretrained segmentation model is unavailable.
#[derive(Clone, Copy, Debug, Default)]
pub struct BrightnessBlobSegmenter;

impl Segmenter for BrightnessBlobSegmenter {
    fn segment(&self, _id: &str, img256: &Raster) -> Result<Mask, SegmentError> {
        if img256.width() != 256 || img256.height() != 256 {
            return Err(SegmentError::BadDimensions {
                width: img256.width(),
                height: img256.height(),
            });
        }
        let lum = img256.luminance();
        let mut hist = [0usize; 256];
        for &v in lum.samples() {
            hist[v as usize] += 1;
        }
        let n = lum.samples().len();
        let rank = libm::ceil(0.99 * n as f64) as usize;
        let mut cumulative = 0;
        let mut threshold = 255;
        for (v, &count) in hist.iter().enumerate() {
            cumulative += count;
            if cumulative >= rank {
                threshold = v;
                break;
            }
        }
        let floor_value = hist.iter().position(|&c| c > 0).unwrap_or(0);
        let bits: Vec<bool> = lum
            .samples()
            .iter()
            .map(|&v| usize::from(v) >= threshold && usize::from(v) > floor_value)
            .collect();
        let candidates = Mask::new(256, 256, bits).expect("mask dims match image");
        let (labels, components) = label_components(&candidates);
        let mut best: Option<&Component> = None;
        for c in &components {
            if best.is_none_or(|b| c.area > b.area) {
                best = Some(c);
            }
        }
        let Some(keep) = best else {
            return Ok(Mask::filled(256, 256, false));
        };
        let bits = labels.iter().map(|&l| l == keep.label).collect();
        Ok(Mask::new(256, 256, bits).expect("mask dims match image"))
    }
}

/// Tightest box containing all true pixels; `None` for an empty mask.
pub fn mask_to_bbox(mask: &Mask) -> Option<BoundingBox> {
    let (w, h) = (mask.width(), mask.height());
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (w, h, 0u32, 0u32);
    let mut any = false;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                any = true;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
        }
    }
    any.then(|| BoundingBox {
        x: min_x,
        y: min_y,
        w: max_x - min_x + 1,
        h: max_y - min_y + 1,
        frame: Frame::Resized256,
    })
}

/// Disc diameter proxy: the longer side of the tight box.
pub fn disc_diameter(bbox: &BoundingBox) -> u32 {
    debug_assert_eq!(bbox.frame, Frame::Resized256);
    bbox.w.max(bbox.h)
}

/// Expands a box by padding proportional to the disc diameter, with a floor,
/// clamped to a square working frame.
pub fn pad_bbox_in_frame(
    bbox: &BoundingBox,
    diameter: u32,
    pad_fraction: f64,
    pad_min_px: u32,
    frame: u32,
) -> BoundingBox {
    debug_assert_eq!(bbox.frame, Frame::Resized256);
    let rounded = libm::floor(pad_fraction * f64::from(diameter) + 0.5) as u32;
    let p = rounded.max(pad_min_px).min(frame);
    let x = bbox.x.saturating_sub(p);
    let y = bbox.y.saturating_sub(p);
    let x1 = (bbox.x + bbox.w + p).min(frame);
    let y1 = (bbox.y + bbox.h + p).min(frame);
    BoundingBox { x, y, w: x1 - x, h: y1 - y, frame: Frame::Resized256 }
}

/// Padding rule with the standard constants: 30% of the diameter, floored at
/// 20 px, in the 256 working frame.
pub fn pad_bbox(bbox: &BoundingBox, diameter: u32) -> BoundingBox {
    pad_bbox_in_frame(bbox, diameter, 0.30, 20, 256)
}

/// Maps a working-frame box to original-image coordinates, rounding outward
/// so no covered pixel is lost, and clamping to the image bounds.
pub fn rescale_box_to_original(
    padded: &BoundingBox,
    frame: u32,
    orig_w: u32,
    orig_h: u32,
) -> BoundingBox {
    let sx = f64::from(orig_w) / f64::from(frame);
    let sy = f64::from(orig_h) / f64::from(frame);
    let x0 = libm::floor(f64::from(padded.x) * sx) as u32;
    let y0 = libm::floor(f64::from(padded.y) * sy) as u32;
    let x1 = (libm::ceil(f64::from(padded.x + padded.w) * sx) as u32).min(orig_w);
    let y1 = (libm::ceil(f64::from(padded.y + padded.h) * sy) as u32).min(orig_h);
    BoundingBox {
        x: x0.min(x1.saturating_sub(1)),
        y: y0.min(y1.saturating_sub(1)),
        w: x1.saturating_sub(x0).max(1),
        h: y1.saturating_sub(y0).max(1),
        frame: Frame::Original,
    }
}

/// Tunable constants of the preprocessing pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreprocessParams {
    /// Side of the square working frame and of all output views.
    pub frame: u32,
    pub clahe_clip: f64,
    pub clahe_grid: u32,
    /// Padding as a fraction of the disc diameter.
    pub pad_fraction: f64,
    /// Minimum padding in working-frame pixels.
    pub pad_min_px: u32,
    /// Fallback center-crop side, expressed in the working frame's scale
    /// (the crop takes `fallback_side / frame` of the shorter original side).
    pub fallback_side: u32,
    /// Mask-area fraction above which segmentation counts as failed.
    pub majority_fraction: f64,
    /// Crops narrower than this (in original pixels) trigger the fallback.
    pub min_crop_px: u32,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            frame: 256,
            clahe_clip: 0.01,
            clahe_grid: 8,
            pad_fraction: 0.30,
            pad_min_px: 20,
            fallback_side: 272,
            majority_fraction: 0.5,
            min_crop_px: 8,
        }
    }
}

/// The three aligned views derived from one original image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewSet {
    pub original_view: Raster,
    pub cropped_view: Raster,
    pub polar_view: Raster,
    pub used_fallback: bool,
}

/// Fallback crop side for an original whose shorter side is `shorter`:
/// the working-frame ratio `fallback_side : frame` scaled up, capped at the
/// image itself.
fn fallback_crop_side(shorter: u32, fallback_side: u32, frame: u32) -> u32 {
    let side =
        libm::floor(f64::from(shorter) * f64::from(fallback_side) / f64::from(frame) + 0.5) as u32;
    side.clamp(1, shorter)
}

/// Runs the full preprocessing pipeline for one sample.
///
/// The original is resized to the working frame and contrast-enhanced for
/// segmentation only; all emitted views carry raw (non-equalized) pixels.
/// The crop happens on the full-resolution original, using the padded disc
/// box mapped outward. Fallback (center crop at the `fallback_side : frame`
/// ratio) engages exactly when the mask is empty, covers more than
/// `majority_fraction` of the frame, or the mapped crop degenerates below
/// `min_crop_px`.
pub fn preprocess_sample(
    id: &str,
    original: &Raster,
    segmenter: &dyn Segmenter,
    params: &PreprocessParams,
) -> Result<ViewSet, SegmentError> {
    let frame = params.frame;
    let resized = resize_bilinear(original, frame, frame);
    let seg_input = clahe(&resized, params.clahe_clip, params.clahe_grid);
    let mask = segmenter.segment(id, &seg_input)?;
    if mask.width() != frame || mask.height() != frame {
        return Err(SegmentError::MaskDimensions { width: mask.width(), height: mask.height() });
    }

    let frame_area = frame as usize * frame as usize;
    let area = mask.area();
    let majority = area as f64 > params.majority_fraction * frame_area as f64;
    let mut crop: Option<Raster> = None;
    if area > 0 && !majority {
        let bbox = mask_to_bbox(&mask).expect("nonempty mask has a bbox");
        let diameter = disc_diameter(&bbox);
        let padded =
            pad_bbox_in_frame(&bbox, diameter, params.pad_fraction, params.pad_min_px, frame);
        let rect = rescale_box_to_original(&padded, frame, original.width(), original.height());
        if rect.w >= params.min_crop_px && rect.h >= params.min_crop_px {
            crop = Some(
                original
                    .crop_rect(rect.x, rect.y, rect.w, rect.h)
                    .expect("rescaled box is clamped to the original"),
            );
        }
    }
    let used_fallback = crop.is_none();
    let crop = match crop {
        Some(c) => c,
        None => {
            let shorter = original.width().min(original.height());
            let side = fallback_crop_side(shorter, params.fallback_side, frame);
            center_crop(original, side).expect("fallback side is capped at the image")
        }
    };
    let cropped_view = resize_bilinear(&crop, frame, frame);
    let polar_view = polar_transform(&cropped_view, frame, frame);
    Ok(ViewSet { original_view: resized, cropped_view, polar_view, used_fallback })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Segmenter stub returning a fixed mask, for orchestration tests.
    struct FixedMask(Mask);

    impl Segmenter for FixedMask {
        fn segment(&self, _id: &str, _img: &Raster) -> Result<Mask, SegmentError> {
            Ok(self.0.clone())
        }
    }

    fn disc_image(n: u32, cx: f64, cy: f64, r: f64, bg: u8, fg: u8) -> Raster {
        let mut img = Raster::filled(n, n, 1, bg);
        for y in 0..n {
            for x in 0..n {
                if libm::hypot(f64::from(x) - cx, f64::from(y) - cy) <= r {
                    img.set(x, y, 0, fg);
                }
            }
        }
        img
    }

    #[test]
    fn all_black_image_gives_empty_mask() {
        let img = Raster::filled(256, 256, 1, 0);
        let mask = BrightnessBlobSegmenter.segment("s", &img).unwrap();
        assert_eq!(mask.area(), 0);
    }

    #[test]
    fn wrong_dimensions_are_rejected() {
        let img = Raster::filled(128, 256, 1, 0);
        assert_eq!(
            BrightnessBlobSegmenter.segment("s", &img),
            Err(SegmentError::BadDimensions { width: 128, height: 256 })
        );
    }

    #[test]
    fn bright_disc_is_recovered_within_one_pixel() {
        let (cx, cy, r) = (130.0, 120.0, 40.0);
        let img = disc_image(256, cx, cy, r, 20, 250);
        let mask = BrightnessBlobSegmenter.segment("s", &img).unwrap();
        for y in 0..256 {
            for x in 0..256 {
                let d = libm::hypot(f64::from(x) - cx, f64::from(y) - cy);
                if d <= r - 1.0 {
                    assert!(mask.get(x, y), "missing disc pixel ({x},{y})");
                } else if d > r + 1.0 {
                    assert!(!mask.get(x, y), "stray mask pixel ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn largest_component_wins() {
        let mut img = Raster::filled(256, 256, 1, 0);
        // 25x20 = 500 px and 20x10 = 200 px bright rectangles.
        for y in 10..30 {
            for x in 10..35 {
                img.set(x, y, 0, 250);
            }
        }
        for y in 100..110 {
            for x in 100..120 {
                img.set(x, y, 0, 250);
            }
        }
        let mask = BrightnessBlobSegmenter.segment("s", &img).unwrap();
        assert_eq!(mask.area(), 500);
        assert!(mask.get(10, 10) && mask.get(34, 29));
        assert!(!mask.get(100, 100));
    }

    #[test]
    fn bbox_of_empty_and_simple_masks() {
        let empty = Mask::filled(64, 64, false);
        assert_eq!(mask_to_bbox(&empty), None);

        let mut single = Mask::filled(64, 64, false);
        single.set(10, 20, true);
        let b = mask_to_bbox(&single).unwrap();
        assert_eq!((b.x, b.y, b.w, b.h), (10, 20, 1, 1));

        let mut pair = Mask::filled(64, 64, false);
        pair.set(5, 5, true);
        pair.set(30, 40, true);
        let b = mask_to_bbox(&pair).unwrap();
        assert_eq!((b.x, b.y, b.w, b.h), (5, 5, 26, 36));
    }

    #[test]
    fn diameter_is_the_longer_side() {
        let mk = |w, h| BoundingBox { x: 0, y: 0, w, h, frame: Frame::Resized256 };
        assert_eq!(disc_diameter(&mk(40, 30)), 40);
        assert_eq!(disc_diameter(&mk(1, 1)), 1);
        assert_eq!(disc_diameter(&BoundingBox { x: 2, y: 3, w: 17, h: 29, frame: Frame::Resized256 }), 29);
    }

    #[test]
    fn padding_follows_the_30_percent_rule_with_floor() {
        let bbox = BoundingBox { x: 100, y: 100, w: 50, h: 50, frame: Frame::Resized256 };
        // diameter 100 -> 30 px of padding.
        let p = pad_bbox(&bbox, 100);
        assert_eq!((p.x, p.y, p.w, p.h), (70, 70, 110, 110));
        // diameter 50 -> 15 rounds below the 20 px floor.
        let p = pad_bbox(&bbox, 50);
        assert_eq!((p.x, p.y, p.w, p.h), (80, 80, 90, 90));
        // diameter 67 -> round(20.1) = 20, exactly at the floor.
        let p = pad_bbox(&bbox, 67);
        assert_eq!((p.x, p.y, p.w, p.h), (80, 80, 90, 90));
    }

    #[test]
    fn padding_never_drops_below_the_floor() {
        let bbox = BoundingBox { x: 120, y: 120, w: 10, h: 10, frame: Frame::Resized256 };
        for d in 1..=500u32 {
            let p = pad_bbox(&bbox, d);
            let expected = (libm::floor(0.3 * f64::from(d) + 0.5) as u32).max(20).min(256);
            assert_eq!(p.x, 120u32.saturating_sub(expected), "diameter {d}");
            assert!(120 - p.x >= 20 || expected >= 120);
        }
    }

    #[test]
    fn padded_box_clamps_to_the_frame() {
        let bbox = BoundingBox { x: 2, y: 240, w: 30, h: 14, frame: Frame::Resized256 };
        let p = pad_bbox(&bbox, 100);
        assert_eq!((p.x, p.y), (0, 210));
        assert_eq!((p.x + p.w, p.y + p.h), (62, 256));
    }

    #[test]
    fn components_of_empty_full_and_two_squares() {
        assert!(connected_components(&Mask::filled(8, 8, false)).is_empty());

        let full = connected_components(&Mask::filled(8, 8, true));
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].area, 64);

        let mut two = Mask::filled(16, 16, false);
        for (bx, by) in [(1u32, 1u32), (10, 10)] {
            for dy in 0..2 {
                for dx in 0..2 {
                    two.set(bx + dx, by + dy, true);
                }
            }
        }
        let comps = connected_components(&two);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.area == 4));
        assert_eq!(comps[0].label, 0);
        assert_eq!((comps[0].bbox.x, comps[0].bbox.y), (1, 1));
        assert_eq!((comps[1].bbox.x, comps[1].bbox.y), (10, 10));
    }

    #[test]
    fn diagonal_pixels_are_separate_components() {
        let mut m = Mask::filled(4, 4, false);
        m.set(0, 0, true);
        m.set(1, 1, true);
        assert_eq!(connected_components(&m).len(), 2);
    }

    #[test]
    fn empty_mask_engages_the_center_crop_fallback() {
        let original = disc_image(300, 150.0, 150.0, 60.0, 15, 240);
        let params = PreprocessParams::default();
        let stub = FixedMask(Mask::filled(256, 256, false));
        let views = preprocess_sample("s", &original, &stub, &params).unwrap();
        assert!(views.used_fallback);
        // 272-px rule: round(300 * 272/256) = 319 caps at the image side.
        let expected = resize_bilinear(&center_crop(&original, 300).unwrap(), 256, 256);
        assert_eq!(views.cropped_view, expected);
        assert_eq!(views.original_view, resize_bilinear(&original, 256, 256));
    }

    #[test]
    fn majority_mask_engages_the_fallback() {
        let original = disc_image(300, 150.0, 150.0, 60.0, 15, 240);
        let stub = FixedMask(Mask::filled(256, 256, true));
        let views =
            preprocess_sample("s", &original, &stub, &PreprocessParams::default()).unwrap();
        assert!(views.used_fallback);
    }

    #[test]
    fn exact_majority_does_not_trigger_fallback() {
        let mut mask = Mask::filled(256, 256, false);
        for y in 0..128 {
            for x in 0..256 {
                mask.set(x, y, true);
            }
        }
        assert_eq!(mask.area() * 2, 256 * 256);
        let original = disc_image(300, 150.0, 150.0, 60.0, 15, 240);
        let views =
            preprocess_sample("s", &original, &FixedMask(mask), &PreprocessParams::default())
                .unwrap();
        assert!(!views.used_fallback);
    }

    #[test]
    fn degenerate_mapped_crop_engages_the_fallback() {
        // A tiny original makes the mapped box collapse below min_crop_px.
        let original = Raster::filled(4, 4, 1, 128);
        let mut mask = Mask::filled(256, 256, false);
        mask.set(128, 128, true);
        let views =
            preprocess_sample("s", &original, &FixedMask(mask), &PreprocessParams::default())
                .unwrap();
        assert!(views.used_fallback);
    }

    #[test]
    fn centered_disc_is_cropped_with_margin() {
        let original = disc_image(512, 255.5, 255.5, 32.0, 20, 250);
        let views = preprocess_sample(
            "s",
            &original,
            &BrightnessBlobSegmenter,
            &PreprocessParams::default(),
        )
        .unwrap();
        assert!(!views.used_fallback);
        let v = &views.cropped_view;
        assert_eq!((v.width(), v.height()), (256, 256));
        // The disc must sit fully inside with clear margin on every side.
        let mut bright = 0usize;
        for y in 0..256 {
            for x in 0..256 {
                if v.get(x, y, 0) > 128 {
                    bright += 1;
                    assert!(
                        (20..236).contains(&x) && (20..236).contains(&y),
                        "disc pixel touches the border at ({x},{y})"
                    );
                }
            }
        }
        assert!(bright > 5_000, "disc missing from the crop ({bright} px)");
    }

    #[test]
    fn mapped_box_arithmetic_is_outward_and_clamped() {
        let padded = BoundingBox { x: 92, y: 92, w: 72, h: 72, frame: Frame::Resized256 };
        let rect = rescale_box_to_original(&padded, 256, 512, 512);
        assert_eq!((rect.x, rect.y, rect.w, rect.h), (184, 184, 144, 144));
        assert_eq!(rect.frame, Frame::Original);
        // Non-square original scales each axis independently.
        let rect = rescale_box_to_original(&padded, 256, 640, 300);
        assert_eq!(rect.x, 230); // floor(92 * 2.5)
        assert_eq!(rect.y, 107); // floor(92 * 300/256) = floor(107.8)
        assert_eq!(rect.x + rect.w, 410); // ceil(164 * 2.5)
        assert_eq!(rect.y + rect.h, 193); // ceil(164 * 300/256) = ceil(192.2)
    }

    #[test]
    fn mask_pixels_map_inside_the_crop() {
        let (cx, cy, r) = (140.0, 110.0, 45.0);
        let original = disc_image(700, cx * 700.0 / 256.0, cy * 700.0 / 256.0, r * 700.0 / 256.0, 18, 245);
        let resized = resize_bilinear(&original, 256, 256);
        let seg_input = clahe(&resized, 0.01, 8);
        let mask = BrightnessBlobSegmenter.segment("s", &seg_input).unwrap();
        assert!(mask.area() > 0);
        let bbox = mask_to_bbox(&mask).unwrap();
        let padded = pad_bbox(&bbox, disc_diameter(&bbox));
        let rect = rescale_box_to_original(&padded, 256, 700, 700);
        let (sx, sy) = (700.0 / 256.0, 700.0 / 256.0);
        for y in 0..256u32 {
            for x in 0..256u32 {
                if mask.get(x, y) {
                    assert!(f64::from(x) * sx >= f64::from(rect.x) - 1e-9);
                    assert!(f64::from(x + 1) * sx <= f64::from(rect.x + rect.w) + 1e-9);
                    assert!(f64::from(y) * sy >= f64::from(rect.y) - 1e-9);
                    assert!(f64::from(y + 1) * sy <= f64::from(rect.y + rect.h) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let original = disc_image(320, 160.0, 150.0, 55.0, 22, 240);
        let params = PreprocessParams::default();
        let a = preprocess_sample("s", &original, &BrightnessBlobSegmenter, &params).unwrap();
        let b = preprocess_sample("s", &original, &BrightnessBlobSegmenter, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn views_are_frame_sized_for_odd_inputs() {
        for (w, h) in [(64u32, 64u32), (101, 367), (800, 600)] {
            let mut original = Raster::filled(w, h, 1, 30);
            original.set(w / 2, h / 2, 0, 250);
            let views = preprocess_sample(
                "s",
                &original,
                &BrightnessBlobSegmenter,
                &PreprocessParams::default(),
            )
            .unwrap();
            for v in [&views.original_view, &views.cropped_view, &views.polar_view] {
                assert_eq!((v.width(), v.height()), (256, 256), "{w}x{h}");
            }
        }
    }
}
