use crate::boxes::PixelBox;
use crate::rng::fnv1a64;

use super::ImageU8;

/// Outline of an axis-aligned rectangle with inclusive corners, `thickness`
/// pixels wide and growing inward, clipped at the borders.
pub fn draw_box(image: &ImageU8, bbox: PixelBox, color: [u8; 3], thickness: u32) -> ImageU8 {
    let mut out = image.clone();
    let t = i64::from(thickness.max(1));
    let (w, h) = (i64::from(image.width()), i64::from(image.height()));
    let x_lo = bbox.x_min.max(0);
    let x_hi = bbox.x_max.min(w - 1);
    let y_lo = bbox.y_min.max(0);
    let y_hi = bbox.y_max.min(h - 1);
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let on_edge = x < bbox.x_min + t || x > bbox.x_max - t || y < bbox.y_min + t || y > bbox.y_max - t;
            if on_edge {
                out.set_pixel(x as u32, y as u32, color);
            }
        }
    }
    out
}

/// Filled discs of `radius` pixels centered on each point.
pub fn draw_keypoints(image: &ImageU8, points: &[[f64; 2]], radius: u32, color: [u8; 3]) -> ImageU8 {
    let mut out = image.clone();
    let r = f64::from(radius.max(1));
    let (w, h) = (f64::from(image.width()), f64::from(image.height()));
    for &[px, py] in points {
        if !(px.is_finite() && py.is_finite()) {
            continue;
        }
        let x0 = (px - r).floor().max(0.0);
        let x1 = (px + r).ceil().min(w - 1.0);
        let y0 = (py - r).floor().max(0.0);
        let y1 = (py + r).ceil().min(h - 1.0);
        if x0 > x1 || y0 > y1 {
            continue;
        }
        for y in y0 as u32..=y1 as u32 {
            for x in x0 as u32..=x1 as u32 {
                let dx = f64::from(x) - px;
                let dy = f64::from(y) - py;
                if dx * dx + dy * dy <= r * r {
                    out.set_pixel(x, y, color);
                }
            }
        }
    }
    out
}

/// Stable color from the FNV-1a hash of a class name: low three bytes as RGB.
pub fn class_color(class_name: &str) -> [u8; 3] {
    let h = fnv1a64(class_name.as_bytes());
    [h as u8, (h >> 8) as u8, (h >> 16) as u8]
}
