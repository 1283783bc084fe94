//! Inverse warping of 8-bit images by a pose homography, plus corner overlays.
//!
//! Pixel `(i, j)` covers the unit square with its centre at `(i + 0.5, j + 0.5)`
//! in the continuous coordinates the homographies act on.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ColorType, DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{pose_to_homography, CornerSet, Frame, Homography, Intrinsics, PoseHypothesis};

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!("{channels} channels, expected 1 or 3")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("empty {width}x{height} image")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height}x{channels} image, expected {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![value; width as usize * height as usize * channels as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32, c: u8) -> u8 {
        self.data[self.offset(x, y) + c as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, c: u8, value: u8) {
        let i = self.offset(x, y) + c as usize;
        self.data[i] = value;
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    /// Three-channel copy; gray samples are replicated.
    pub fn to_rgb(&self) -> Self {
        if self.channels == 3 {
            return self.clone();
        }
        Self {
            channels: 3,
            data: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            ..*self
        }
    }

    /// Decodes a PNG. 8-bit gray and RGB are kept as they are; other colour
    /// types are converted to whichever of the two matches.
    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
        Ok(match img {
            DynamicImage::ImageLuma8(buf) => {
                let (w, h) = buf.dimensions();
                Self::new(w, h, 1, buf.into_raw())?
            }
            DynamicImage::ImageRgb8(buf) => {
                let (w, h) = buf.dimensions();
                Self::new(w, h, 3, buf.into_raw())?
            }
            other if other.color().has_color() => {
                let buf = other.to_rgb8();
                let (w, h) = buf.dimensions();
                Self::new(w, h, 3, buf.into_raw())?
            }
            other => {
                let buf = other.to_luma8();
                let (w, h) = buf.dimensions();
                Self::new(w, h, 1, buf.into_raw())?
            }
        })
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let color = if self.channels == 1 {
            ExtendedColorType::L8
        } else {
            ExtendedColorType::Rgb8
        };
        let mut out = Vec::new();
        PngEncoder::new(Cursor::new(&mut out)).write_image(&self.data, self.width, self.height, color)?;
        Ok(out)
    }

    pub fn read_png(path: &Path) -> Result<Self> {
        Self::from_png_bytes(&std::fs::read(path)?)
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_png_bytes()?)?)
    }
}

/// Colour type of a PNG without decoding the pixels.
pub(crate) fn png_color(bytes: &[u8]) -> Result<ColorType> {
    let decoder = image::codecs::png::PngDecoder::new(Cursor::new(bytes))?;
    Ok(image::ImageDecoder::color_type(&decoder))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

/// Samples `src` at continuous position `p`; false outside the image.
#[inline]
fn sample(src: &RasterImage, p: [f64; 2], interp: Interpolation, out: &mut [u8]) -> bool {
    let (w, h) = (src.width as f64, src.height as f64);
    // Index space: pixel centres at integers.
    let u = p[0] - 0.5;
    let v = p[1] - 0.5;
    if !(u >= -0.5 && u <= w - 0.5 && v >= -0.5 && v <= h - 0.5) {
        return false;
    }
    let ch = src.channels as usize;
    match interp {
        Interpolation::Nearest => {
            let x = (p[0].floor() as i64).clamp(0, src.width as i64 - 1) as u32;
            let y = (p[1].floor() as i64).clamp(0, src.height as i64 - 1) as u32;
            let o = src.offset(x, y);
            out.copy_from_slice(&src.data[o..o + ch]);
        }
        Interpolation::Bilinear => {
            let (x0, y0) = (u.floor(), v.floor());
            let (fx, fy) = (u - x0, v - y0);
            let clamp_x = |x: f64| (x as i64).clamp(0, src.width as i64 - 1) as u32;
            let clamp_y = |y: f64| (y as i64).clamp(0, src.height as i64 - 1) as u32;
            let (xa, xb) = (clamp_x(x0), clamp_x(x0 + 1.0));
            let (ya, yb) = (clamp_y(y0), clamp_y(y0 + 1.0));
            let (o00, o10) = (src.offset(xa, ya), src.offset(xb, ya));
            let (o01, o11) = (src.offset(xa, yb), src.offset(xb, yb));
            for (c, slot) in out.iter_mut().enumerate() {
                let s = |o: usize| src.data[o + c] as f64;
                let top = s(o00) + fx * (s(o10) - s(o00));
                let bottom = s(o01) + fx * (s(o11) - s(o01));
                let value = top + fy * (bottom - top);
                *slot = value.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    true
}

/// Each destination pixel centre `q` takes the source sample at
/// `dest_to_src(q)`; unmapped pixels are 0.
pub fn warp_with(
    src: &RasterImage,
    dest_to_src: &Homography,
    out_size: (u32, u32),
    interp: Interpolation,
) -> RasterImage {
    let (w, h) = out_size;
    let ch = src.channels as usize;
    let mut out = RasterImage::filled(w, h, src.channels, 0);
    let row_len = w as usize * ch;
    out.data
        .par_chunks_mut(row_len.max(1))
        .enumerate()
        .for_each(|(j, row)| {
            let y = j as f64 + 0.5;
            for i in 0..w as usize {
                let q = [i as f64 + 0.5, y];
                if let Some(p) = dest_to_src.apply(q) {
                    sample(src, p, interp, &mut row[i * ch..(i + 1) * ch]);
                }
            }
        });
    out
}

/// Rectifies `src` with the pose homography `H`: every destination pixel `q`
/// samples the source at `H⁻¹·q`.
pub fn warp_image(
    src: &RasterImage,
    pose: &PoseHypothesis,
    k: &Intrinsics,
    out_size: (u32, u32),
    interp: Interpolation,
) -> Result<RasterImage> {
    let inverse = pose_to_homography(pose, k)?.inverse()?;
    Ok(warp_with(src, &inverse, out_size, interp))
}

/// Half-length of the cross arms, pixels.
pub const CROSS_ARM: i64 = 5;

/// Draws a cross centred on the pixel containing each corner: red on RGB
/// images, white on gray ones. Parts outside the image are clipped.
pub fn overlay_corners(img: &RasterImage, corners: &CornerSet) -> Result<RasterImage> {
    if corners.frame() != Frame::PixelImage {
        return Err(Error::WrongFrame {
            expected: Frame::PixelImage,
            found: corners.frame(),
        });
    }
    let mut out = img.clone();
    let colour: &[u8] = if img.channels == 3 { &[255, 0, 0] } else { &[255] };
    for [x, y] in corners.xy() {
        if !(x.is_finite() && y.is_finite()) {
            continue;
        }
        let (cx, cy) = (x.floor() as i64, y.floor() as i64);
        let arms = (-CROSS_ARM..=CROSS_ARM)
            .map(|d| (cx + d, cy))
            .chain((-CROSS_ARM..=CROSS_ARM).map(|d| (cx, cy + d)));
        for (px, py) in arms {
            if px >= 0 && py >= 0 && px < img.width as i64 && py < img.height as i64 {
                for (c, &v) in colour.iter().enumerate() {
                    out.set(px as u32, py as u32, c as u8, v);
                }
            }
        }
    }
    Ok(out)
}
