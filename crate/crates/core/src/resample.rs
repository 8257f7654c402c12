//! Geometric resampling: bilinear resize, center crop, flips, and
//! rotation/scaling about the image center.
//!
//! All warps use inverse mapping with half-pixel centers: output pixel
//! `(x, y)` samples the input at the point that maps onto it, so a
//! same-size resize, a zero-degree rotation, and a unit scale are exact
//! identities. Resize and the polar transform clamp samples to the edge;
//! rotation and scaling treat outside pixels as zero.

use crate::raster::{quantize, Raster, RasterError};
use alloc::vec::Vec;

/// Bilinear sample with coordinates clamped to the image border.
#[inline]
pub(crate) fn sample_clamped(img: &Raster, x: f64, y: f64, c: u8) -> f64 {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = libm::floor(x);
    let y0 = libm::floor(y);
    let fx = x - x0;
    let fy = y - y0;
    let clamp = |v: i64, hi: i64| v.clamp(0, hi - 1) as u32;
    let (x0i, y0i) = (x0 as i64, y0 as i64);
    let (xa, xb) = (clamp(x0i, w), clamp(x0i + 1, w));
    let (ya, yb) = (clamp(y0i, h), clamp(y0i + 1, h));
    let p00 = f64::from(img.get(xa, ya, c));
    let p10 = f64::from(img.get(xb, ya, c));
    let p01 = f64::from(img.get(xa, yb, c));
    let p11 = f64::from(img.get(xb, yb, c));
    (p00 * (1.0 - fx) + p10 * fx) * (1.0 - fy) + (p01 * (1.0 - fx) + p11 * fx) * fy
}

/// Bilinear sample where taps outside the image contribute zero.
#[inline]
fn sample_zero(img: &Raster, x: f64, y: f64, c: u8) -> f64 {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = libm::floor(x);
    let y0 = libm::floor(y);
    let fx = x - x0;
    let fy = y - y0;
    let (x0i, y0i) = (x0 as i64, y0 as i64);
    let tap = |xi: i64, yi: i64| -> f64 {
        if xi < 0 || yi < 0 || xi >= w || yi >= h {
            0.0
        } else {
            f64::from(img.get(xi as u32, yi as u32, c))
        }
    };
    (tap(x0i, y0i) * (1.0 - fx) + tap(x0i + 1, y0i) * fx) * (1.0 - fy)
        + (tap(x0i, y0i + 1) * (1.0 - fx) + tap(x0i + 1, y0i + 1) * fx) * fy
}

/// Applies `src_of(x, y) -> (sx, sy)` inverse mapping over an output grid.
fn warp(
    img: &Raster,
    out_w: u32,
    out_h: u32,
    clamped: bool,
    src_of: impl Fn(f64, f64) -> (f64, f64),
) -> Raster {
    let ch = img.channels();
    let mut out = Vec::with_capacity(out_w as usize * out_h as usize * ch as usize);
    for y in 0..out_h {
        for x in 0..out_w {
            let (sx, sy) = src_of(f64::from(x), f64::from(y));
            for c in 0..ch {
                let v = if clamped {
                    sample_clamped(img, sx, sy, c)
                } else {
                    sample_zero(img, sx, sy, c)
                };
                out.push(quantize(v));
            }
        }
    }
    Raster::new(out_w, out_h, ch, out).expect("warp: valid dims")
}

/// Bilinear resize to `out_w x out_h` with half-pixel-center mapping.
pub fn resize_bilinear(img: &Raster, out_w: u32, out_h: u32) -> Raster {
    assert!(out_w > 0 && out_h > 0, "resize target must be nonzero");
    let sx = f64::from(img.width()) / f64::from(out_w);
    let sy = f64::from(img.height()) / f64::from(out_h);
    warp(img, out_w, out_h, true, |x, y| ((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5))
}

/// Centered square crop of side `size`; offsets round down for odd margins.
pub fn center_crop(img: &Raster, size: u32) -> Result<Raster, RasterError> {
    if size == 0 {
        return Err(RasterError::EmptyDimensions);
    }
    if size > img.width() || size > img.height() {
        return Err(RasterError::OutOfBounds);
    }
    let x = (img.width() - size) / 2;
    let y = (img.height() - size) / 2;
    img.crop_rect(x, y, size, size)
}

/// Horizontal mirror (left-right).
pub fn flip_horizontal(img: &Raster) -> Raster {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = Vec::with_capacity(img.samples().len());
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                out.push(img.get(w - 1 - x, y, c));
            }
        }
    }
    Raster::new(w, h, ch, out).expect("flip: valid dims")
}

/// Vertical mirror (top-bottom).
pub fn flip_vertical(img: &Raster) -> Raster {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = Vec::with_capacity(img.samples().len());
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                out.push(img.get(x, h - 1 - y, c));
            }
        }
    }
    Raster::new(w, h, ch, out).expect("flip: valid dims")
}

/// Rotates by `degrees` counterclockwise about the image center,
/// zero-filling pixels that fall outside the source.
pub fn rotate(img: &Raster, degrees: f64) -> Raster {
    let rad = degrees.to_radians();
    let (sin, cos) = (libm::sin(rad), libm::cos(rad));
    let cx = f64::from(img.width() - 1) / 2.0;
    let cy = f64::from(img.height() - 1) / 2.0;
    warp(img, img.width(), img.height(), false, |x, y| {
        let (dx, dy) = (x - cx, y - cy);
        // Inverse rotation: where did this output pixel come from?
        (cx + cos * dx + sin * dy, cy - sin * dx + cos * dy)
    })
}

/// Scales by `factor` about the image center (same output size),
/// zero-filling pixels that fall outside the source.
pub fn scale_about_center(img: &Raster, factor: f64) -> Raster {
    assert!(factor > 0.0, "scale factor must be positive");
    let cx = f64::from(img.width() - 1) / 2.0;
    let cy = f64::from(img.height() - 1) / 2.0;
    warp(img, img.width(), img.height(), false, |x, y| {
        (cx + (x - cx) / factor, cy + (y - cy) / factor)
    })
}
