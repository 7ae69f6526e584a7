use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Quaternion};

/// Four-parameter pinhole model, pixels, no distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, GeometryError> {
        let cam = Self { fx, fy, cx, cy };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.fx.is_finite() && self.fy.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "focal lengths must be positive, got ({}, {})",
                self.fx, self.fy
            )));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(GeometryError::InvalidIntrinsics("non-finite principal point".into()));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, GeometryError> {
        let cam: Self = serde_json::from_str(text).map_err(|e| GeometryError::InvalidIntrinsics(e.to_string()))?;
        cam.validate()?;
        Ok(cam)
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::InvalidIntrinsics(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// Object-to-camera rigid transform: `p_cam = R * p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Quaternion,
    pub translation: [f64; 3],
}

impl Pose {
    pub fn new(rotation: Quaternion, translation: [f64; 3]) -> Result<Self, GeometryError> {
        Ok(Self {
            rotation: rotation.normalize()?,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Quaternion::IDENTITY,
            translation: [0.0; 3],
        }
    }

    pub fn transform(&self, p: [f64; 3]) -> [f64; 3] {
        let r = self.rotation.rotate(p);
        [
            r[0] + self.translation[0],
            r[1] + self.translation[1],
            r[2] + self.translation[2],
        ]
    }
}

/// Projects object-frame points to pixels.
pub fn project_points(
    points: &[[f64; 3]],
    pose: &Pose,
    cam: &CameraIntrinsics,
) -> Result<Vec<[f64; 2]>, GeometryError> {
    let r = pose.rotation.to_matrix()?;
    let t = nalgebra::Vector3::from(pose.translation);
    points
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            let c = r * nalgebra::Vector3::from(p) + t;
            if !(c.z > 1e-9) {
                return Err(GeometryError::BehindCamera { index, z: c.z });
            }
            Ok([cam.fx * (c.x / c.z) + cam.cx, cam.fy * (c.y / c.z) + cam.cy])
        })
        .collect()
}

pub fn normalize_keypoints(points: &[[f64; 2]], width: u32, height: u32) -> Vec<[f64; 2]> {
    let (w, h) = (f64::from(width.max(1)), f64::from(height.max(1)));
    points.iter().map(|&[x, y]| [x / w, y / h]).collect()
}

pub fn denormalize_keypoints(points: &[[f64; 2]], width: u32, height: u32) -> Vec<[f64; 2]> {
    let (w, h) = (f64::from(width.max(1)), f64::from(height.max(1)));
    points.iter().map(|&[x, y]| [x * w, y * h]).collect()
}
