//! PNG image I/O bridging [`Raster`] to disk, plus PGM mask ingestion for
//! externally computed segmentations.

use crate::error::{data, internal, io_data, Result};
use crate::util::atomic_write;
use fundus_core::segment::Mask;
use fundus_core::Raster;
use image::{ColorType, DynamicImage, ImageEncoder, ImageReader};
use std::fs;
use std::path::Path;

/// Loads a PNG as an 8-bit raster: grayscale stays single-channel, anything
/// else is converted to RGB.
pub fn load_png(path: &Path) -> Result<Raster> {
    let img = ImageReader::open(path)
        .map_err(|e| io_data(path, e))?
        .decode()
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    let raster = match img {
        DynamicImage::ImageLuma8(gray) => {
            let (w, h) = gray.dimensions();
            Raster::new(w, h, 1, gray.into_raw())
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            Raster::new(w, h, 3, rgb.into_raw())
        }
    };
    raster.map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Encodes a raster as PNG and writes it atomically.
pub fn save_png(path: &Path, raster: &Raster) -> Result<()> {
    let color = match raster.channels() {
        1 => ColorType::L8,
        _ => ColorType::Rgb8,
    };
    let mut bytes = Vec::new();
    image::codecs::png::PngEncoder::new(&mut bytes)
        .write_image(raster.samples(), raster.width(), raster.height(), color.into())
        .map_err(|e| internal(format!("PNG encode failed: {e}")))?;
    atomic_write(path, &bytes)
}

/// Loads a binary PGM as a segmentation mask; samples above 127 count as
/// disc pixels.
pub fn load_pgm_mask(path: &Path) -> Result<Mask> {
    let bytes = fs::read(path).map_err(|e| io_data(path, e))?;
    let raster = fundus_core::raster::decode_pnm(&bytes)
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    if raster.channels() != 1 {
        return Err(data(format!("{}: mask must be single-channel", path.display())));
    }
    let bits = raster.samples().iter().map(|&v| v > 127).collect();
    Mask::new(raster.width(), raster.height(), bits)
        .map_err(|e| internal(format!("mask from {}: {e}", path.display())))
}
