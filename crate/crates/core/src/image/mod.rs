//! Image buffers, file I/O, resizing, color conversion, photometric
//! adjustments and drawing.
//!
//! [`ImageU8`] is the canonical storage. Adjustments compute in floating
//! point and re-quantize with round-half-away-from-zero.

mod adjust;
mod augment;
mod color;
mod draw;
mod io;
mod resize;

pub use adjust::{adjust_brightness, adjust_contrast, adjust_hue, adjust_saturation, flip_left_right, normalize};
pub use augment::{sample_params, AugmentationConfig, AugmentationParams, Range, SampledParam};
pub use color::{hsv_to_rgb, rgb_to_hsv};
pub use draw::{class_color, draw_box, draw_keypoints};
pub use io::{decode_ppm, encode_image, encode_ppm, load_image, save_image};
pub use resize::resize_bilinear;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("invalid dimensions {width}x{height} for {len} bytes")]
    InvalidDimensions { width: u32, height: u32, len: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Row-major interleaved RGB bytes, origin top-left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageU8 {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl ImageU8 {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || data.len() != width as usize * height as usize * 3 {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    /// Image filled with one color. Panics on zero dimensions.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    pub(crate) fn map_pixels(&self, mut f: impl FnMut([u8; 3]) -> [u8; 3]) -> ImageU8 {
        let mut data = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(3) {
            data.extend_from_slice(&f([px[0], px[1], px[2]]));
        }
        ImageU8 {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Row-major float image with 1 or 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageF32 {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<f32>,
}

impl ImageF32 {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<f32>) -> Result<Self, ImageError> {
        let ok = width > 0
            && height > 0
            && matches!(channels, 1 | 3)
            && data.len() == width as usize * height as usize * channels as usize;
        if !ok {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Round half away from zero and clamp into the byte range.
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}
