use super::color::{hsv_to_rgb, rgb_to_hsv};
use super::{quantize, ImageF32, ImageU8};

/// Adds `delta` (8-bit scale) to every channel.
pub fn adjust_brightness(image: &ImageU8, delta: f64) -> ImageU8 {
    image.map_pixels(|px| px.map(|c| quantize(f64::from(c) + delta)))
}

/// Multiplies every channel by `alpha` (plain scaling, not mean-centered).
pub fn adjust_contrast(image: &ImageU8, alpha: f64) -> ImageU8 {
    image.map_pixels(|px| px.map(|c| quantize(f64::from(c) * alpha)))
}

fn through_hsv(image: &ImageU8, f: impl Fn([f64; 3]) -> [f64; 3]) -> ImageU8 {
    image.map_pixels(|px| {
        let hsv = rgb_to_hsv(px.map(|c| f64::from(c) / 255.0));
        hsv_to_rgb(f(hsv)).map(|c| quantize(c * 255.0))
    })
}

/// Scales HSV saturation by `alpha`, clamped to `[0, 1]`.
pub fn adjust_saturation(image: &ImageU8, alpha: f64) -> ImageU8 {
    through_hsv(image, |[h, s, v]| [h, (s * alpha).clamp(0.0, 1.0), v])
}

/// Rotates hue by `delta_degrees`, modulo 360.
pub fn adjust_hue(image: &ImageU8, delta_degrees: f64) -> ImageU8 {
    through_hsv(image, |[h, s, v]| [(h + delta_degrees).rem_euclid(360.0), s, v])
}

pub fn flip_left_right(image: &ImageU8) -> ImageU8 {
    let w = image.width() as usize;
    let mut data = Vec::with_capacity(image.data().len());
    for row in image.data().chunks_exact(w * 3) {
        for px in row.chunks_exact(3).rev() {
            data.extend_from_slice(px);
        }
    }
    ImageU8::new(image.width(), image.height(), data).expect("same dimensions")
}

/// Bytes to floats in `[0, 1]`.
pub fn normalize(image: &ImageU8) -> ImageF32 {
    let data = image.data().iter().map(|&c| f32::from(c) / 255.0).collect();
    ImageF32::new(image.width(), image.height(), 3, data).expect("same dimensions")
}
