use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Quaternion stored in `(w, x, y, z)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Sign convention resolving the double cover: `w > 0`, or when `w == 0`
    /// the first nonzero of `x, y, z` is positive.
    pub fn is_canonical(&self) -> bool {
        if self.w != 0.0 {
            return self.w > 0.0;
        }
        [self.x, self.y, self.z]
            .into_iter()
            .find(|&c| c != 0.0)
            .is_none_or(|c| c > 0.0)
    }

    pub fn canonical(self) -> Self {
        if self.is_canonical() {
            self
        } else {
            // `+ 0.0` turns negated zeros into positive zeros
            Self::new(-self.w + 0.0, -self.x + 0.0, -self.y + 0.0, -self.z + 0.0)
        }
    }

    /// Unit norm and canonical sign.
    pub fn normalize(&self) -> Result<Self, GeometryError> {
        let n = self.norm();
        if !(n > 1e-12) || !n.is_finite() {
            return Err(GeometryError::ZeroNorm);
        }
        Ok(Self::new(self.w / n, self.x / n, self.y / n, self.z / n).canonical())
    }

    /// Rotation matrix of a unit quaternion.
    pub fn to_matrix(&self) -> Result<Matrix3<f64>, GeometryError> {
        let n = self.norm();
        if (n - 1.0).abs() > 1e-6 || !n.is_finite() {
            return Err(GeometryError::NotUnit(n));
        }
        let Quaternion { w, x, y, z } = *self;
        Ok(Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }

    /// Rotates `v` by this (unit) quaternion.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = Quaternion::new(0.0, v[0], v[1], v[2]);
        let r = quaternion_multiply(&quaternion_multiply(self, &p), &self.conjugate());
        [r.x, r.y, r.z]
    }

    /// Geodesic angle in radians between the rotations of two unit quaternions.
    pub fn angle_to(&self, other: &Quaternion) -> f64 {
        let d = quaternion_multiply(&self.conjugate(), other);
        let v = (d.x * d.x + d.y * d.y + d.z * d.z).sqrt();
        2.0 * v.atan2(d.w.abs())
    }
}

/// Hamilton product. Applying `a * b` rotates by `b` first, then by `a`.
pub fn quaternion_multiply(a: &Quaternion, b: &Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

/// Rotation matrix to canonical unit quaternion.
///
/// Extracts from the largest of the trace and the three diagonal entries so
/// the divisor stays well away from zero, including near half turns.
pub fn matrix_to_quaternion(r: &Matrix3<f64>) -> Result<Quaternion, GeometryError> {
    let dev = (r * r.transpose() - Matrix3::identity()).amax();
    if !(dev <= 1e-6) {
        return Err(GeometryError::NotARotation(format!("orthonormality deviation {dev:e}")));
    }
    let det = r.determinant();
    if !(det > 0.0) {
        return Err(GeometryError::NotARotation(format!("determinant {det}")));
    }
    let m = |i: usize, j: usize| r[(i, j)];
    let trace = m(0, 0) + m(1, 1) + m(2, 2);
    let q = if trace >= m(0, 0) && trace >= m(1, 1) && trace >= m(2, 2) {
        let s = (1.0 + trace).sqrt() * 2.0;
        Quaternion::new(
            s / 4.0,
            (m(2, 1) - m(1, 2)) / s,
            (m(0, 2) - m(2, 0)) / s,
            (m(1, 0) - m(0, 1)) / s,
        )
    } else if m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2) {
        let s = (1.0 + m(0, 0) - m(1, 1) - m(2, 2)).sqrt() * 2.0;
        Quaternion::new(
            (m(2, 1) - m(1, 2)) / s,
            s / 4.0,
            (m(0, 1) + m(1, 0)) / s,
            (m(0, 2) + m(2, 0)) / s,
        )
    } else if m(1, 1) >= m(2, 2) {
        let s = (1.0 + m(1, 1) - m(0, 0) - m(2, 2)).sqrt() * 2.0;
        Quaternion::new(
            (m(0, 2) - m(2, 0)) / s,
            (m(0, 1) + m(1, 0)) / s,
            s / 4.0,
            (m(1, 2) + m(2, 1)) / s,
        )
    } else {
        let s = (1.0 + m(2, 2) - m(0, 0) - m(1, 1)).sqrt() * 2.0;
        Quaternion::new(
            (m(1, 0) - m(0, 1)) / s,
            (m(0, 2) + m(2, 0)) / s,
            (m(1, 2) + m(2, 1)) / s,
            s / 4.0,
        )
    };
    q.normalize()
}

pub fn axis_angle_to_quaternion(axis: [f64; 3], angle: f64) -> Result<Quaternion, GeometryError> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(n > 1e-12) || !n.is_finite() {
        return Err(GeometryError::ZeroAxis);
    }
    let (s, c) = (angle / 2.0).sin_cos();
    Quaternion::new(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n).normalize()
}
