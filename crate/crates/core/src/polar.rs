//! Cartesian/polar coordinate conversion and the log-free polar unwrap of an
//! image about its center: output columns sweep angle, output rows sweep
//! radius, so concentric structure becomes horizontal bands.

use crate::raster::{quantize, Raster};
use crate::resample::sample_clamped;
use alloc::vec::Vec;
use core::f64::consts::TAU;

/// A point in image-plane Cartesian coordinates, relative to the transform
/// center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub u: f64,
    pub v: f64,
}

/// Polar coordinates: radius and angle in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarCoord {
    pub r: f64,
    pub theta: f64,
}

/// `r = sqrt(u^2 + v^2)`, `theta = atan2(v, u)` wrapped into `[0, 2pi)`.
pub fn cartesian_to_polar(p: Point) -> PolarCoord {
    let r = libm::hypot(p.u, p.v);
    let mut theta = libm::atan2(p.v, p.u);
    if theta < 0.0 {
        theta += TAU;
    }
    PolarCoord { r, theta }
}

/// `u = r cos(theta)`, `v = r sin(theta)`.
pub fn polar_to_cartesian(c: PolarCoord) -> Point {
    Point { u: c.r * libm::cos(c.theta), v: c.r * libm::sin(c.theta) }
}

/// Polar unwrap: output pixel `(i, j)` samples the input at angle
/// `2pi * (i + 0.5) / out_w` and radius `r_max * (j + 0.5) / out_h`, where
/// `r_max = min(w, h) / 2` and the center sits at the half-pixel middle of
/// the image. Sampling is bilinear with edge clamping.
pub fn polar_transform(img: &Raster, out_w: u32, out_h: u32) -> Raster {
    assert!(out_w > 0 && out_h > 0, "polar target must be nonzero");
    let cx = f64::from(img.width() - 1) / 2.0;
    let cy = f64::from(img.height() - 1) / 2.0;
    let r_max = f64::from(img.width().min(img.height())) / 2.0;
    let ch = img.channels();
    let mut out = Vec::with_capacity(out_w as usize * out_h as usize * ch as usize);
    for j in 0..out_h {
        let r = r_max * (f64::from(j) + 0.5) / f64::from(out_h);
        for i in 0..out_w {
            let theta = TAU * (f64::from(i) + 0.5) / f64::from(out_w);
            let p = polar_to_cartesian(PolarCoord { r, theta });
            for c in 0..ch {
                out.push(quantize(sample_clamped(img, cx + p.u, cy + p.v, c)));
            }
        }
    }
    Raster::new(out_w, out_h, ch, out).expect("polar: valid dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five_triangle() {
        let c = cartesian_to_polar(Point { u: 3.0, v: 4.0 });
        assert!((c.r - 5.0).abs() < 1e-12);
        assert!((c.theta - 0.927_295_218_001_612_2).abs() < 1e-12);
    }

    #[test]
    fn negative_quadrant_wraps_into_positive_angles() {
        let c = cartesian_to_polar(Point { u: 0.0, v: -1.0 });
        assert!((c.theta - 3.0 * core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((c.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polar_roundtrips_cartesian_points() {
        for &(u, v) in &[(3.0, 4.0), (-2.5, 0.75), (0.1, -9.0), (-1.0, -1.0)] {
            let p = polar_to_cartesian(cartesian_to_polar(Point { u, v }));
            assert!((p.u - u).abs() < 1e-12 && (p.v - v).abs() < 1e-12, "({u},{v})");
        }
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = Raster::filled(33, 47, 1, 99);
        let out = polar_transform(&img, 64, 32);
        assert_eq!(out.width(), 64);
        assert_eq!(out.height(), 32);
        assert!(out.samples().iter().all(|&v| v == 99));
    }

    #[test]
    fn concentric_rings_become_horizontal_bands() {
        // Radially smooth intensity: each output row holds one radius, so the
        // per-row standard deviation must collapse.
        let n = 128u32;
        let c = f64::from(n - 1) / 2.0;
        let mut img = Raster::filled(n, n, 1, 0);
        for y in 0..n {
            for x in 0..n {
                let d = libm::hypot(f64::from(x) - c, f64::from(y) - c);
                img.set(x, y, 0, quantize(255.0 * (0.5 + 0.5 * libm::cos(d / 9.0))));
            }
        }
        let out = polar_transform(&img, 128, 128);
        for j in 0..128 {
            let row: alloc::vec::Vec<f64> =
                (0..128).map(|i| f64::from(out.get(i, j, 0))).collect();
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64;
            assert!(libm::sqrt(var) <= 2.0, "row {j} std {}", libm::sqrt(var));
        }
    }
}
