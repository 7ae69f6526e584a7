use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::BoxError;

/// Normalized corner box `[x_min, y_min, x_max, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct BoxCorner {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoxCorner {
    /// Builds a box, rejecting inverted extents.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, BoxError> {
        // NaN fails both comparisons and is rejected too.
        if !(x_min <= x_max && y_min <= y_max) {
            return Err(BoxError::InvalidBox([x_min, y_min, x_max, y_max]));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

impl From<BoxCorner> for [f64; 4] {
    fn from(b: BoxCorner) -> Self {
        b.to_array()
    }
}

impl TryFrom<[f64; 4]> for BoxCorner {
    type Error = BoxError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        BoxCorner::new(v[0], v[1], v[2], v[3])
    }
}

/// Center box `(cx, cy, w, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCenter {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxCenter {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.cx, self.cy, self.w, self.h]
    }

    pub fn from_corner(b: &BoxCorner) -> Self {
        Self {
            cx: (b.x_min + b.x_max) / 2.0,
            cy: (b.y_min + b.y_max) / 2.0,
            w: b.x_max - b.x_min,
            h: b.y_max - b.y_min,
        }
    }

    pub fn to_corner(&self) -> BoxCorner {
        BoxCorner {
            x_min: self.cx - self.w / 2.0,
            y_min: self.cy - self.h / 2.0,
            x_max: self.cx + self.w / 2.0,
            y_max: self.cy + self.h / 2.0,
        }
    }
}

/// Integer pixel box with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelBox {
    pub x_min: i64,
    pub y_min: i64,
    pub x_max: i64,
    pub y_max: i64,
}

impl PixelBox {
    pub fn to_array(self) -> [i64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

pub fn to_center_form(boxes: &[BoxCorner]) -> Vec<BoxCenter> {
    boxes.iter().map(BoxCenter::from_corner).collect()
}

pub fn to_corner_form(boxes: &[BoxCenter]) -> Vec<BoxCorner> {
    boxes.iter().map(BoxCenter::to_corner).collect()
}

/// Intersection over union of two boxes; zero when the union is empty.
pub fn iou(a: &BoxCorner, b: &BoxCorner) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Pairwise IoU matrix, `a.len()` rows by `b.len()` columns.
pub fn compute_ious(a: &[BoxCorner], b: &[BoxCorner]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| iou(&a[i], &b[j]))
}

fn round_half_away(x: f64) -> f64 {
    // f64::round already rounds half away from zero.
    x.round()
}

/// Scales normalized boxes to pixels, rounding half away from zero and
/// clamping to `[0, dim - 1]`.
pub fn denormalize(boxes: &[BoxCorner], width: u32, height: u32) -> Vec<PixelBox> {
    let w = f64::from(width.max(1));
    let h = f64::from(height.max(1));
    let px = |v: f64, scale: f64| -> i64 {
        let r = round_half_away(v * scale);
        r.clamp(0.0, scale - 1.0) as i64
    };
    boxes
        .iter()
        .map(|b| PixelBox {
            x_min: px(b.x_min, w),
            y_min: px(b.y_min, h),
            x_max: px(b.x_max, w),
            y_max: px(b.y_max, h),
        })
        .collect()
}

/// Pixel boxes back to normalized coordinates (no clamping).
pub fn normalize_pixel_boxes(boxes: &[PixelBox], width: u32, height: u32) -> Vec<BoxCorner> {
    let w = f64::from(width.max(1));
    let h = f64::from(height.max(1));
    boxes
        .iter()
        .map(|b| BoxCorner {
            x_min: b.x_min as f64 / w,
            y_min: b.y_min as f64 / h,
            x_max: b.x_max as f64 / w,
            y_max: b.y_max as f64 / h,
        })
        .collect()
}

pub fn flip_boxes_horizontal(boxes: &[BoxCorner]) -> Vec<BoxCorner> {
    boxes
        .iter()
        .map(|b| BoxCorner {
            x_min: 1.0 - b.x_max,
            y_min: b.y_min,
            x_max: 1.0 - b.x_min,
            y_max: b.y_max,
        })
        .collect()
}
