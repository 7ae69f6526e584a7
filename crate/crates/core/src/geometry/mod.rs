//! Rotations, pinhole cameras, keypoint scaling and linear pose estimation.

mod camera;
mod pnp;
mod quaternion;

pub use camera::{denormalize_keypoints, normalize_keypoints, project_points, CameraIntrinsics, Pose};
pub use pnp::solve_pnp_dlt;
pub use quaternion::{axis_angle_to_quaternion, matrix_to_quaternion, quaternion_multiply, Quaternion};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("quaternion norm is zero")]
    ZeroNorm,
    #[error("quaternion is not unit (norm {0})")]
    NotUnit(f64),
    #[error("matrix is not a rotation: {0}")]
    NotARotation(String),
    #[error("rotation axis has zero length")]
    ZeroAxis,
    #[error("point {index} is behind the camera (z = {z})")]
    BehindCamera { index: usize, z: f64 },
    #[error("need at least 6 correspondences, got {0}")]
    InsufficientPoints(usize),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
}
