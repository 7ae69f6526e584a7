//! Box math: coordinate forms, overlap, suppression and anchor coding.
//!
//! Boxes inside pipelines are normalized corner boxes: `[0, 1]` image
//! coordinates, origin top-left, x to the right and y downward. Pixel
//! coordinates only appear at the edges via [`denormalize`].

mod anchors;
mod forms;
mod nms;

pub use anchors::{
    decode, decode_unclipped, encode, grid_anchors, match_to_anchors, AnchorSet, MatchResult, Variances,
};
pub use forms::{
    compute_ious, denormalize, flip_boxes_horizontal, iou, normalize_pixel_boxes, to_center_form, to_corner_form,
    BoxCenter, BoxCorner, PixelBox,
};
pub use nms::{nms, nms_per_class};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoxError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate box (width {width}, height {height})")]
    DegenerateBox { width: f64, height: f64 },
    #[error("invalid box {0:?}: minimum exceeds maximum")]
    InvalidBox([f64; 4]),
    #[error("invalid anchor set: {0}")]
    InvalidAnchors(String),
}
