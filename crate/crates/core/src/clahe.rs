//! Contrast-limited adaptive histogram equalization.
//!
//! The image is divided into a `grid x grid` lattice of tiles. Each tile gets
//! an equalization lookup table built from its clipped histogram: bins are
//! capped at `ceil(clip_fraction * tile_pixels)` and the clipped excess is
//! spread uniformly over all 256 bins, which bounds local contrast gain.
//! Pixels are remapped by bilinearly interpolating the LUTs of the four
//! nearest tile centers, so tile seams stay invisible.
//!
//! Color images are handled through luminance: the LUT chain runs on the
//! luma channel and each RGB sample is rescaled by the luma ratio, which
//! preserves hue.

use crate::raster::{quantize, Raster};
use alloc::vec;
use alloc::vec::Vec;

/// Caps histogram bins at `ceil(clip_fraction * total)` and spreads the
/// excess uniformly across all 256 bins.
fn clipped_histogram(hist: &[u32; 256], total: usize, clip_fraction: f64) -> [f64; 256] {
    let limit = libm::ceil(clip_fraction * total as f64);
    let mut out = [0.0f64; 256];
    let mut excess = 0.0;
    for (o, &b) in out.iter_mut().zip(hist.iter()) {
        let b = f64::from(b);
        if b > limit {
            excess += b - limit;
            *o = limit;
        } else {
            *o = b;
        }
    }
    let share = excess / 256.0;
    for o in &mut out {
        *o += share;
    }
    out
}

/// Equalization LUT for one tile. Tiles with a single distinct value map to
/// the identity so flat regions pass through unchanged.
fn tile_lut(hist: &[u32; 256], total: usize, clip_fraction: f64) -> [u8; 256] {
    let mut lut = [0u8; 256];
    if hist.iter().filter(|&&b| b > 0).count() <= 1 {
        for (v, slot) in lut.iter_mut().enumerate() {
            *slot = v as u8;
        }
        return lut;
    }
    let clipped = clipped_histogram(hist, total, clip_fraction);
    let mut cdf = 0.0;
    for v in 0..256 {
        cdf += clipped[v];
        lut[v] = quantize(255.0 * cdf / total as f64);
    }
    lut
}

/// CLAHE over a single-channel image.
fn clahe_gray(img: &Raster, clip_fraction: f64, grid: u32) -> Raster {
    let (w, h) = (img.width(), img.height());
    // Never let a tile be narrower than one pixel.
    let gx = grid.min(w) as usize;
    let gy = grid.min(h) as usize;

    // Pixel -> tile assignment mirrors the interpolation coordinate below.
    let tile_x: Vec<usize> = (0..w as usize).map(|x| x * gx / w as usize).collect();
    let tile_y: Vec<usize> = (0..h as usize).map(|y| y * gy / h as usize).collect();

    let mut hist = vec![[0u32; 256]; gx * gy];
    let mut counts = vec![0usize; gx * gy];
    for y in 0..h {
        for x in 0..w {
            let t = tile_y[y as usize] * gx + tile_x[x as usize];
            hist[t][img.get(x, y, 0) as usize] += 1;
            counts[t] += 1;
        }
    }
    let luts: Vec<[u8; 256]> = hist
        .iter()
        .zip(&counts)
        .map(|(h, &n)| tile_lut(h, n, clip_fraction))
        .collect();

    let mut out = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        // Tile-space coordinate of this pixel (half-pixel centers).
        let v = (f64::from(y) + 0.5) * gy as f64 / f64::from(h) - 0.5;
        let ty = libm::floor(v);
        let fy = v - ty;
        let (ya, yb) = (clamp_tile(ty, gy), clamp_tile(ty + 1.0, gy));
        for x in 0..w {
            let u = (f64::from(x) + 0.5) * gx as f64 / f64::from(w) - 0.5;
            let tx = libm::floor(u);
            let fx = u - tx;
            let (xa, xb) = (clamp_tile(tx, gx), clamp_tile(tx + 1.0, gx));
            let val = img.get(x, y, 0) as usize;
            let top = f64::from(luts[ya * gx + xa][val]) * (1.0 - fx)
                + f64::from(luts[ya * gx + xb][val]) * fx;
            let bottom = f64::from(luts[yb * gx + xa][val]) * (1.0 - fx)
                + f64::from(luts[yb * gx + xb][val]) * fx;
            out.push(quantize(top * (1.0 - fy) + bottom * fy));
        }
    }
    Raster::new(w, h, 1, out).expect("clahe: valid dims")
}

#[inline]
fn clamp_tile(t: f64, g: usize) -> usize {
    if t <= 0.0 {
        0
    } else if t >= (g - 1) as f64 {
        g - 1
    } else {
        t as usize
    }
}

/// Contrast-limited adaptive histogram equalization.
///
/// `clip_fraction` is the per-bin cap as a fraction of tile pixels (in
/// `(0, 1]`; 1 disables clipping) and `grid` is the tile lattice size per
/// axis (>= 1; 1 means global equalization).
pub fn clahe(img: &Raster, clip_fraction: f64, grid: u32) -> Raster {
    assert!(clip_fraction > 0.0 && clip_fraction <= 1.0, "clip_fraction must be in (0, 1]");
    assert!(grid >= 1, "grid must be >= 1");
    if img.channels() == 1 {
        return clahe_gray(img, clip_fraction, grid);
    }
    let luma = img.luminance();
    let equalized = clahe_gray(&luma, clip_fraction, grid);
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w as usize * h as usize * 3);
    for y in 0..h {
        for x in 0..w {
            let before = luma.get(x, y, 0);
            let after = equalized.get(x, y, 0);
            if before == 0 {
                out.extend_from_slice(&[after, after, after]);
            } else {
                let gain = f64::from(after) / f64::from(before);
                for c in 0..3 {
                    out.push(quantize(f64::from(img.get(x, y, c)) * gain));
                }
            }
        }
    }
    Raster::new(w, h, 3, out).expect("clahe: valid dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain global histogram equalization, as an independent oracle for the
    /// grid = 1, clip = 1 case.
    fn global_equalization(img: &Raster) -> Vec<u8> {
        let mut hist = [0u64; 256];
        for &v in img.samples() {
            hist[v as usize] += 1;
        }
        let total = img.samples().len() as f64;
        let mut cdf = 0u64;
        let mut lut = [0u8; 256];
        for v in 0..256 {
            cdf += hist[v];
            lut[v] = quantize(255.0 * cdf as f64 / total);
        }
        img.samples().iter().map(|&v| lut[v as usize]).collect()
    }

    fn textured(n: u32) -> Raster {
        let mut samples = Vec::with_capacity((n * n) as usize);
        for y in 0..n {
            for x in 0..n {
                samples.push(((x * 7 + y * 13) % 200 + 20) as u8);
            }
        }
        Raster::new(n, n, 1, samples).unwrap()
    }

    #[test]
    fn constant_image_is_unchanged() {
        let img = Raster::filled(32, 32, 1, 61);
        assert_eq!(clahe(&img, 1.0, 1), img);
        assert_eq!(clahe(&img, 0.01, 8), img);
    }

    #[test]
    fn two_level_image_spreads_to_midpoint_and_top() {
        let mut img = Raster::filled(16, 16, 1, 100);
        for i in 0..128 {
            img.samples_mut()[i] = 110;
        }
        let out = clahe(&img, 1.0, 1);
        for (o, i) in out.samples().iter().zip(img.samples()) {
            let expect = if *i == 110 { 255i32 } else { 127 };
            assert!((i32::from(*o) - expect).abs() <= 1, "{i} -> {o}");
        }
    }

    #[test]
    fn unclipped_single_tile_matches_global_equalization() {
        let img = textured(40);
        assert_eq!(clahe(&img, 1.0, 1).samples(), global_equalization(&img).as_slice());
    }

    #[test]
    fn minimal_clip_fraction_approaches_identity() {
        // With clip 1/256 every occupied bin is capped at its uniform share,
        // so a full-range histogram collapses to the identity CDF.
        let mut samples = Vec::new();
        for y in 0..64u32 {
            for x in 0..256u32 {
                samples.push(((x + y * 7) % 256) as u8);
            }
        }
        let img = Raster::new(256, 64, 1, samples).unwrap();
        let out = clahe(&img, 1.0 / 256.0, 1);
        for (o, i) in out.samples().iter().zip(img.samples()) {
            assert!((i32::from(*o) - i32::from(*i)).abs() <= 1, "{i} -> {o}");
        }
    }

    #[test]
    fn clipping_bounds_every_bin() {
        let mut hist = [0u32; 256];
        hist[10] = 900;
        hist[200] = 124;
        let total = 1024;
        for clip in [0.01, 0.1, 0.5] {
            let clipped = clipped_histogram(&hist, total, clip);
            let limit = libm::ceil(clip * total as f64);
            let quotient = (900.0f64 - limit).max(0.0) + (124.0 - limit).max(0.0);
            for b in clipped {
                assert!(b <= limit + quotient / 256.0 + 1.0);
            }
            // Redistribution conserves mass.
            assert!((clipped.iter().sum::<f64>() - total as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn gray_and_equal_channel_rgb_agree() {
        let gray = textured(32);
        let mut rgb_samples = Vec::new();
        for &v in gray.samples() {
            rgb_samples.extend_from_slice(&[v, v, v]);
        }
        let rgb = Raster::new(32, 32, 3, rgb_samples).unwrap();
        let out_gray = clahe(&gray, 0.05, 4);
        let out_rgb = clahe(&rgb, 0.05, 4);
        for y in 0..32 {
            for x in 0..32 {
                for c in 0..3 {
                    let diff =
                        i32::from(out_rgb.get(x, y, c)) - i32::from(out_gray.get(x, y, 0));
                    assert!(diff.abs() <= 1, "({x},{y},{c})");
                }
            }
        }
    }

    #[test]
    fn color_ratios_are_preserved() {
        // A red-dominant pixel must stay red-dominant in proportion.
        let mut samples = Vec::new();
        for i in 0..64u32 {
            let v = (i * 3 + 20) as u8;
            samples.extend_from_slice(&[v.saturating_mul(2).min(200), v, v / 2]);
        }
        let img = Raster::new(8, 8, 3, samples).unwrap();
        let out = clahe(&img, 1.0, 1);
        let mut checked = 0;
        for y in 0..8 {
            for x in 0..8 {
                let (ir, ib) = (img.get(x, y, 0), img.get(x, y, 2));
                let (or_, ob) = (out.get(x, y, 0), out.get(x, y, 2));
                // Skip pixels where +-0.5 rounding alone distorts the ratio.
                if ib >= 20 && ob >= 20 {
                    checked += 1;
                    let before = f64::from(ir) / f64::from(ib);
                    let after = f64::from(or_) / f64::from(ob);
                    assert!((before - after).abs() / before < 0.15, "({x},{y})");
                }
            }
        }
        assert!(checked >= 20, "only {checked} pixels bright enough to compare");
    }

    #[test]
    fn output_dimensions_match_input() {
        let img = textured(33);
        let out = clahe(&img, 0.01, 8);
        assert_eq!((out.width(), out.height(), out.channels()), (33, 33, 1));
    }
}
