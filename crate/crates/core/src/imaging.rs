//! Grayscale images, PGM I/O and integral-image rectangle queries.
//!
//! Everything downstream (feature evaluation, window normalization, cascade
//! scanning) reads pixels only through [`IntegralImage`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImagingError {
    #[error("bad PGM magic number {0:?} (expected P2 or P5)")]
    BadMagic(String),
    #[error("PGM maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("PGM maxval must be at least 1")]
    ZeroMaxval,
    #[error("non-numeric PGM header token {0:?}")]
    BadToken(String),
    #[error("PGM header ended early")]
    HeaderEof,
    #[error("truncated PGM payload: expected {expected} pixels, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("PGM sample {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error("invalid image dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {found} bytes, {width}x{height} needs {expected}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
    #[error("rect {rect:?} does not fit a {width}x{height} image")]
    RectOutOfBounds {
        rect: Rect,
        width: usize,
        height: usize,
    },
    #[error("window statistics need a nonzero area")]
    ZeroArea,
}

/// Axis-aligned rectangle in pixel units, top-left anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    pub fn intersection_area(&self, other: &Rect) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            0
        } else {
            (x1 - x0) * (y1 - y0)
        }
    }

    /// Intersection over union; two empty rects have IoU 0.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// 8-bit grayscale image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::BadDimensions { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(ImagingError::BadDimensions { width, height })?;
        if pixels.len() != expected {
            return Err(ImagingError::BufferSize {
                width,
                height,
                expected,
                found: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Image with every pixel set to `value`.
    ///
    /// Panics on a zero dimension.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("nonzero dimensions")
    }

    /// Builds an image from a per-pixel function `f(x, y)`.
    ///
    /// Panics on a zero dimension.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels).expect("nonzero dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn crop(&self, r: Rect) -> Result<GrayImage, ImagingError> {
        if !r.fits(self.width, self.height) || r.area() == 0 {
            return Err(ImagingError::RectOutOfBounds {
                rect: r,
                width: self.width,
                height: self.height,
            });
        }
        Ok(GrayImage::from_fn(r.w, r.h, |x, y| self.get(r.x + x, r.y + y)))
    }

    /// Copies `src` into this image with its top-left corner at (x, y),
    /// clipping anything that falls outside.
    pub fn blit(&mut self, src: &GrayImage, x: usize, y: usize) {
        for sy in 0..src.height {
            let ty = y + sy;
            if ty >= self.height {
                break;
            }
            for sx in 0..src.width {
                let tx = x + sx;
                if tx >= self.width {
                    break;
                }
                self.set(tx, ty, src.get(sx, sy));
            }
        }
    }

    /// Nearest-neighbour resample.
    pub fn resize_nearest(&self, width: usize, height: usize) -> GrayImage {
        GrayImage::from_fn(width, height, |x, y| {
            let sx = (x * self.width / width).min(self.width - 1);
            let sy = (y * self.height / height).min(self.height - 1);
            self.get(sx, sy)
        })
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8], ImagingError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImagingError::HeaderEof);
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<u32, ImagingError> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| ImagingError::BadToken(String::from_utf8_lossy(tok).into_owned()))
    }
}

/// Decodes a binary (P5) or ASCII (P2) PGM with maxval at most 255.
///
/// Samples are taken as stored; no rescaling to 255 is applied when maxval
/// is smaller.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    let mut hdr = HeaderReader { bytes, pos: 0 };
    let magic = if bytes.len() >= 2 {
        &bytes[..2]
    } else {
        bytes
    };
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => return Err(ImagingError::BadMagic(String::from_utf8_lossy(other).into_owned())),
    };
    hdr.pos = 2;
    let width = hdr.number()? as usize;
    let height = hdr.number()? as usize;
    let maxval = hdr.number()?;
    if maxval > 255 {
        return Err(ImagingError::MaxvalTooLarge(maxval));
    }
    if maxval == 0 {
        return Err(ImagingError::ZeroMaxval);
    }
    if width == 0 || height == 0 {
        return Err(ImagingError::BadDimensions { width, height });
    }
    let expected = width * height;

    let pixels = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let start = hdr.pos + 1;
        let payload = bytes.get(start..).unwrap_or(&[]);
        if payload.len() < expected {
            return Err(ImagingError::Truncated {
                expected,
                found: payload.len(),
            });
        }
        let pixels = payload[..expected].to_vec();
        if let Some(&v) = pixels.iter().find(|&&v| u32::from(v) > maxval) {
            return Err(ImagingError::SampleOutOfRange {
                value: v.into(),
                maxval,
            });
        }
        pixels
    } else {
        let mut pixels = Vec::with_capacity(expected);
        while pixels.len() < expected {
            let value = match hdr.number() {
                Ok(v) => v,
                Err(ImagingError::HeaderEof) => {
                    return Err(ImagingError::Truncated {
                        expected,
                        found: pixels.len(),
                    })
                }
                Err(e) => return Err(e),
            };
            if value > maxval {
                return Err(ImagingError::SampleOutOfRange { value, maxval });
            }
            pixels.push(value as u8);
        }
        pixels
    };
    GrayImage::new(width, height, pixels)
}

/// Encodes as binary P5 with maxval 255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

/// Mean and (population) variance of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    pub variance: f64,
}

impl WindowStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Summed-area tables of pixel values and squared pixel values.
///
/// Both tables are `(width + 1) x (height + 1)` with a zero first row and
/// column, so `ii(x, y)` is the sum over all pixels strictly above and to the
/// left of `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    ii: Vec<u64>,
    sq: Vec<u64>,
}

impl IntegralImage {
    pub fn new(image: &GrayImage) -> Self {
        let (w, h) = (image.width, image.height);
        let stride = w + 1;
        let mut ii = vec![0u64; stride * (h + 1)];
        let mut sq = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u64;
            let mut row_sq = 0u64;
            let src = &image.pixels[y * w..(y + 1) * w];
            for (x, &p) in src.iter().enumerate() {
                let p = u64::from(p);
                row += p;
                row_sq += p * p;
                let above = y * stride + x + 1;
                let here = above + stride;
                ii[here] = ii[above] + row;
                sq[here] = sq[above] + row_sq;
            }
        }
        IntegralImage {
            width: w,
            height: h,
            ii,
            sq,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Cumulative sum at table coordinate (x, y), 0 ≤ x ≤ width, 0 ≤ y ≤ height.
    pub fn at(&self, x: usize, y: usize) -> u64 {
        self.ii[y * (self.width + 1) + x]
    }

    pub fn sq_at(&self, x: usize, y: usize) -> u64 {
        self.sq[y * (self.width + 1) + x]
    }

    fn check(&self, r: Rect) -> Result<(), ImagingError> {
        if r.fits(self.width, self.height) {
            Ok(())
        } else {
            Err(ImagingError::RectOutOfBounds {
                rect: r,
                width: self.width,
                height: self.height,
            })
        }
    }

    #[inline]
    fn box_sum(table: &[u64], stride: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> u64 {
        let a = table[y0 * stride + x0];
        let b = table[y0 * stride + x1];
        let c = table[y1 * stride + x0];
        let d = table[y1 * stride + x1];
        (d + a) - (b + c)
    }

    /// Sum of the pixels covered by `r`.
    pub fn rect_sum(&self, r: Rect) -> Result<u64, ImagingError> {
        self.check(r)?;
        Ok(self.sum_unchecked(r.x, r.y, r.w, r.h))
    }

    /// Sum of squared pixels covered by `r`.
    pub fn rect_sq_sum(&self, r: Rect) -> Result<u64, ImagingError> {
        self.check(r)?;
        Ok(Self::box_sum(
            &self.sq,
            self.width + 1,
            r.x,
            r.y,
            r.x + r.w,
            r.y + r.h,
        ))
    }

    /// Rectangle sum without the bounds check; the caller guarantees the
    /// rect fits. Out-of-range input panics on slice indexing.
    #[inline]
    pub fn sum_unchecked(&self, x: usize, y: usize, w: usize, h: usize) -> u64 {
        Self::box_sum(&self.ii, self.width + 1, x, y, x + w, y + h)
    }

    /// Mean and variance of the pixels in `r`, variance clamped at zero.
    pub fn window_stats(&self, r: Rect) -> Result<WindowStats, ImagingError> {
        self.check(r)?;
        if r.area() == 0 {
            return Err(ImagingError::ZeroArea);
        }
        Ok(self.stats_unchecked(r))
    }

    #[inline]
    pub(crate) fn stats_unchecked(&self, r: Rect) -> WindowStats {
        let stride = self.width + 1;
        let (x1, y1) = (r.x + r.w, r.y + r.h);
        let sum = Self::box_sum(&self.ii, stride, r.x, r.y, x1, y1) as f64;
        let sq = Self::box_sum(&self.sq, stride, r.x, r.y, x1, y1) as f64;
        let area = r.area() as f64;
        let mean = sum / area;
        let variance = (sq / area - mean * mean).max(0.0);
        WindowStats { mean, variance }
    }
}
