//! 8-bit raster images (grayscale or RGB) with row-major interleaved samples,
//! plus a binary PNM (P5/P6) codec so the core crate can move pixels without
//! touching any compressed format.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Raster construction and access failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RasterError {
    /// Width or height is zero.
    EmptyDimensions,
    /// Channel count is not 1 or 3.
    BadChannels(u8),
    /// Sample buffer length does not equal `width * height * channels`.
    BadLength { expected: usize, actual: usize },
    /// Requested rectangle falls outside the image.
    OutOfBounds,
}

impl core::fmt::Display for RasterError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::EmptyDimensions => write!(f, "raster dimensions must be nonzero"),
            Self::BadChannels(c) => write!(f, "raster must have 1 or 3 channels, got {c}"),
            Self::BadLength { expected, actual } => {
                write!(f, "raster sample buffer has {actual} bytes, expected {expected}")
            }
            Self::OutOfBounds => write!(f, "requested rectangle exceeds raster bounds"),
        }
    }
}

impl core::error::Error for RasterError {}

/// Rounds to the nearest integer with halves away from zero, clamped to u8.
#[inline]
pub fn quantize(v: f64) -> u8 {
    let r = libm::floor(v + 0.5);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

/// An owned 8-bit image; `channels` is 1 (gray) or 3 (RGB).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: u8,
    samples: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: u8, samples: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyDimensions);
        }
        if channels != 1 && channels != 3 {
            return Err(RasterError::BadChannels(channels));
        }
        let expected = width as usize * height as usize * channels as usize;
        if samples.len() != expected {
            return Err(RasterError::BadLength { expected, actual: samples.len() });
        }
        Ok(Self { width, height, channels, samples })
    }

    /// Uniform image of the given value.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Self {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; len]).expect("filled: valid dims")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    fn index(&self, x: u32, y: u32, c: u8) -> usize {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        (y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, c: u8) -> u8 {
        self.samples[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: u8, value: u8) {
        let i = self.index(x, y, c);
        self.samples[i] = value;
    }

    /// Rec. 601 luminance of a pixel, rounded half away from zero.
    #[inline]
    pub fn luma_at(&self, x: u32, y: u32) -> u8 {
        if self.channels == 1 {
            self.get(x, y, 0)
        } else {
            let r = f64::from(self.get(x, y, 0));
            let g = f64::from(self.get(x, y, 1));
            let b = f64::from(self.get(x, y, 2));
            quantize(0.299 * r + 0.587 * g + 0.114 * b)
        }
    }

    /// Single-channel luminance image (clone for gray input).
    pub fn luminance(&self) -> Raster {
        if self.channels == 1 {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.width as usize * self.height as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.luma_at(x, y));
            }
        }
        Self::new(self.width, self.height, 1, out).expect("luminance: valid dims")
    }

    /// Exact pixel copy of the rectangle at `(x, y)` with size `w x h`.
    pub fn crop_rect(&self, x: u32, y: u32, w: u32, h: u32) -> Result<Raster, RasterError> {
        if w == 0 || h == 0 {
            return Err(RasterError::EmptyDimensions);
        }
        if x.checked_add(w).is_none_or(|r| r > self.width)
            || y.checked_add(h).is_none_or(|b| b > self.height)
        {
            return Err(RasterError::OutOfBounds);
        }
        let ch = self.channels as usize;
        let row_bytes = w as usize * ch;
        let mut out = Vec::with_capacity(row_bytes * h as usize);
        for row in y..y + h {
            let start = (row as usize * self.width as usize + x as usize) * ch;
            out.extend_from_slice(&self.samples[start..start + row_bytes]);
        }
        Self::new(w, h, self.channels, out)
    }
}

/// PNM decode failures, carrying a short reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PnmError(pub String);

impl core::fmt::Display for PnmError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid PNM data: {}", self.0)
    }
}

impl core::error::Error for PnmError {}

/// Encodes as binary PGM (1 channel) or PPM (3 channels), maxval 255.
pub fn encode_pnm(img: &Raster) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.samples());
    out
}

/// Decodes binary PGM/PPM with maxval 255; honors `#` comments in the header.
pub fn decode_pnm(bytes: &[u8]) -> Result<Raster, PnmError> {
    let channels: u8 = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(PnmError("expected P5 or P6 magic".into())),
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        // Skip whitespace and comment lines between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(PnmError("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if pos == start {
            return Err(PnmError("expected numeric header field".into()));
        }
        let text = core::str::from_utf8(&bytes[start..pos]).expect("digits are utf8");
        *field = text.parse().map_err(|_| PnmError(format!("bad header field `{text}`")))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(PnmError(format!("unsupported maxval {maxval}")));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(PnmError("missing whitespace after maxval".into())),
    }
    let expected = width as usize * height as usize * channels as usize;
    let data = bytes.get(pos..).filter(|d| d.len() == expected).ok_or_else(|| {
        PnmError(format!("expected {expected} sample bytes, found {}", bytes.len() - pos))
    })?;
    Raster::new(width, height, channels, data.to_vec()).map_err(|e| PnmError(format!("{e}")))
}
