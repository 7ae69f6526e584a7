//! Linear pose estimation from 3D-2D correspondences.
//!
//! Pixels are first mapped to normalized image rays with the intrinsics.
//! Both point sets are then Hartley-normalized (centroid at the origin, mean
//! distance `sqrt(2)` in 2D and `sqrt(3)` in 3D) before the 2K x 12 DLT
//! system is solved by its smallest right singular vector. The recovered
//! 3x4 matrix is de-normalized, its sign chosen so the points have positive
//! depth, and its left 3x3 block projected onto the nearest rotation.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, SymmetricEigen, Vector3};

use super::{matrix_to_quaternion, CameraIntrinsics, GeometryError, Pose};

const MIN_POINTS: usize = 6;
const SINGULAR_RATIO_LIMIT: f64 = 0.99;
const COPLANAR_EIGEN_RATIO: f64 = 1e-10;

fn similarity_3d(points: &[Vector3<f64>]) -> Result<Matrix4<f64>, GeometryError> {
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vector3<f64>>() / n;
    let mean_dist = points.iter().map(|p| (p - centroid).norm()).sum::<f64>() / n;
    if !(mean_dist > 0.0) {
        return Err(GeometryError::DegenerateConfiguration("3D points coincide".into()));
    }
    let s = 3f64.sqrt() / mean_dist;
    Ok(Matrix4::new(
        s,
        0.0,
        0.0,
        -s * centroid.x,
        0.0,
        s,
        0.0,
        -s * centroid.y,
        0.0,
        0.0,
        s,
        -s * centroid.z,
        0.0,
        0.0,
        0.0,
        1.0,
    ))
}

fn similarity_2d(points: &[[f64; 2]]) -> Result<Matrix3<f64>, GeometryError> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if !(mean_dist > 0.0) {
        return Err(GeometryError::DegenerateConfiguration("2D points coincide".into()));
    }
    let s = 2f64.sqrt() / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn check_not_coplanar(points: &[Vector3<f64>]) -> Result<(), GeometryError> {
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vector3<f64>>() / n;
    let cov = points
        .iter()
        .map(|p| (p - centroid) * (p - centroid).transpose())
        .sum::<Matrix3<f64>>()
        / n;
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let largest = eig.max();
    let smallest = eig.min();
    if !(largest > 0.0) || smallest < COPLANAR_EIGEN_RATIO * largest {
        return Err(GeometryError::DegenerateConfiguration(format!(
            "3D points are coplanar (covariance eigenvalues {smallest:e} / {largest:e})"
        )));
    }
    Ok(())
}

/// Estimates the object-to-camera pose from at least six non-coplanar
/// correspondences. `points2d` are pixels.
pub fn solve_pnp_dlt(
    points3d: &[[f64; 3]],
    points2d: &[[f64; 2]],
    cam: &CameraIntrinsics,
) -> Result<Pose, GeometryError> {
    if points3d.len() != points2d.len() {
        return Err(GeometryError::LengthMismatch {
            left: points3d.len(),
            right: points2d.len(),
        });
    }
    let k = points3d.len();
    if k < MIN_POINTS {
        return Err(GeometryError::InsufficientPoints(k));
    }
    cam.validate()?;

    let world: Vec<Vector3<f64>> = points3d.iter().map(|&p| Vector3::from(p)).collect();
    check_not_coplanar(&world)?;

    let rays: Vec<[f64; 2]> = points2d
        .iter()
        .map(|&[u, v]| [(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy])
        .collect();
    let t3 = similarity_3d(&world)?;
    let t2 = similarity_2d(&rays)?;

    let mut a = DMatrix::<f64>::zeros(2 * k, 12);
    for (i, (p, r)) in world.iter().zip(&rays).enumerate() {
        let x = t3 * p.push(1.0);
        let y = t2 * Vector3::new(r[0], r[1], 1.0);
        let (u, v) = (y.x / y.z, y.y / y.z);
        for j in 0..4 {
            a[(2 * i, j)] = x[j];
            a[(2 * i, 8 + j)] = -u * x[j];
            a[(2 * i + 1, 4 + j)] = x[j];
            a[(2 * i + 1, 8 + j)] = -v * x[j];
        }
    }

    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| GeometryError::DegenerateConfiguration("SVD failed".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, second) = (sv[order[0]], sv[order[1]]);
    if second <= 0.0 || smallest / second > SINGULAR_RATIO_LIMIT {
        return Err(GeometryError::DegenerateConfiguration(format!(
            "null space is not one-dimensional (singular values {smallest:e}, {second:e})"
        )));
    }
    let h = v_t.row(order[0]);
    let p_norm = Matrix3x4::from_fn(|r, c| h[4 * r + c]);

    let t2_inv = t2
        .try_inverse()
        .ok_or_else(|| GeometryError::DegenerateConfiguration("singular 2D normalization".into()))?;
    let mut p = t2_inv * p_norm * t3;

    let depth_sum: f64 = world.iter().map(|x| (p.row(2) * x.push(1.0))[0]).sum();
    if depth_sum < 0.0 {
        p = -p;
    }

    let m: Matrix3<f64> = p.fixed_view::<3, 3>(0, 0).into_owned();
    let m_svd = m.svd(true, true);
    let (u, vt) = match (m_svd.u, m_svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(GeometryError::DegenerateConfiguration("SVD failed".into())),
    };
    let d = (u * vt).determinant().signum();
    let rotation = u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * vt;
    let scale = m_svd.singular_values.sum() / 3.0;
    if !(scale > 0.0) {
        return Err(GeometryError::DegenerateConfiguration("zero projection scale".into()));
    }
    let t = p.column(3) / scale;

    Ok(Pose {
        rotation: matrix_to_quaternion(&rotation)?,
        translation: [t.x, t.y, t.z],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{axis_angle_to_quaternion, project_points, Quaternion};

    fn cam() -> CameraIntrinsics {
        CameraIntrinsics::new(500.0, 520.0, 320.0, 240.0).unwrap()
    }

    fn cube_points() -> Vec<[f64; 3]> {
        vec![
            [-0.3, -0.2, -0.1],
            [0.3, -0.25, 0.05],
            [0.2, 0.3, -0.2],
            [-0.25, 0.2, 0.25],
            [0.05, -0.05, 0.3],
            [-0.1, 0.35, -0.3],
            [0.32, 0.1, 0.2],
            [-0.2, -0.3, 0.15],
        ]
    }

    #[test]
    fn identity_rotation_round_trip() {
        let pose = Pose::new(Quaternion::IDENTITY, [0.0, 0.0, 2.0]).unwrap();
        let pts = cube_points();
        let uv = project_points(&pts, &pose, &cam()).unwrap();
        let est = solve_pnp_dlt(&pts, &uv, &cam()).unwrap();
        for k in 0..3 {
            assert!((est.translation[k] - pose.translation[k]).abs() < 1e-6);
        }
        assert!(est.rotation.angle_to(&pose.rotation) < 1e-6);
    }

    #[test]
    fn rotated_pose_round_trip() {
        let q = axis_angle_to_quaternion([0.2, -1.0, 0.4], 2.9).unwrap();
        let pose = Pose::new(q, [0.3, -0.1, 3.5]).unwrap();
        let pts = cube_points();
        let uv = project_points(&pts, &pose, &cam()).unwrap();
        let est = solve_pnp_dlt(&pts, &uv, &cam()).unwrap();
        assert!(est.rotation.angle_to(&q) < 1e-8);
        for k in 0..3 {
            assert!((est.translation[k] - pose.translation[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn five_points_rejected() {
        let pts = &cube_points()[..5];
        let uv = vec![[0.0, 0.0]; 5];
        assert_eq!(
            solve_pnp_dlt(pts, &uv, &cam()),
            Err(GeometryError::InsufficientPoints(5))
        );
    }

    #[test]
    fn coplanar_rejected() {
        let pts: Vec<[f64; 3]> = (0..8)
            .map(|i| [(i % 3) as f64 * 0.1 - 0.1, (i / 3) as f64 * 0.1 - 0.1, 0.0])
            .collect();
        let pose = Pose::new(Quaternion::IDENTITY, [0.0, 0.0, 2.0]).unwrap();
        let uv = project_points(&pts, &pose, &cam()).unwrap();
        assert!(matches!(
            solve_pnp_dlt(&pts, &uv, &cam()),
            Err(GeometryError::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn mismatched_lengths() {
        let pts = cube_points();
        assert!(matches!(
            solve_pnp_dlt(&pts, &[[0.0, 0.0]; 7], &cam()),
            Err(GeometryError::LengthMismatch { .. })
        ));
    }
}
