use super::Point3;
use crate::error::{Error, Result};

/// Rigid transform: unit quaternion `(w, x, y, z)` plus translation.
///
/// `pose.transform_point(p)` maps points from the pose's local frame into
/// the parent frame, so an ego pose is `city_from_ego`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SE3Pose {
    rotation: [f64; 4],
    translation: Point3,
}

impl SE3Pose {
    pub fn new(rotation: [f64; 4], translation: Point3) -> Result<Self> {
        let norm = rotation.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 || !translation.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "pose quaternion must be unit length (got |q| = {norm})"
            )));
        }
        Ok(SE3Pose { rotation, translation })
    }

    pub fn identity() -> Self {
        SE3Pose {
            rotation: [1.0, 0.0, 0.0, 0.0],
            translation: Point3::default(),
        }
    }

    pub fn from_translation(t: Point3) -> Self {
        SE3Pose { translation: t, ..Self::identity() }
    }

    /// Rotation about +z by `yaw` radians.
    pub fn from_yaw(translation: Point3, yaw: f64) -> Self {
        let (s, c) = (0.5 * yaw).sin_cos();
        SE3Pose {
            rotation: [c, 0.0, 0.0, s],
            translation,
        }
    }

    /// From a row-major rotation matrix (assumed orthonormal).
    pub fn from_matrix(m: [[f64; 3]; 3], translation: Point3) -> Result<Self> {
        let trace = m[0][0] + m[1][1] + m[2][2];
        let q = if trace > 0.0 {
            let s = (trace + 1.0).sqrt() * 2.0;
            [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
        };
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        SE3Pose::new(q.map(|c| c / n), translation)
    }

    pub fn rotation(&self) -> [f64; 4] {
        self.rotation
    }

    pub fn translation(&self) -> Point3 {
        self.translation
    }

    /// Row-major rotation matrix.
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let [w, x, y, z] = self.rotation;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    pub fn rotate(&self, v: Point3) -> Point3 {
        let m = self.rotation_matrix();
        Point3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transform_point(&self, p: Point3) -> Point3 {
        self.rotate(p) + self.translation
    }

    pub fn inverse(&self) -> SE3Pose {
        let [w, x, y, z] = self.rotation;
        let inv = SE3Pose {
            rotation: [w, -x, -y, -z],
            translation: Point3::default(),
        };
        SE3Pose {
            translation: -inv.rotate(self.translation),
            ..inv
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &SE3Pose) -> SE3Pose {
        let [aw, ax, ay, az] = self.rotation;
        let [bw, bx, by, bz] = other.rotation;
        let q = [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ];
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        SE3Pose {
            rotation: q.map(|c| c / n),
            translation: self.transform_point(other.translation),
        }
    }

    /// Heading of the local +x axis in the parent xy-plane, radians.
    pub fn yaw(&self) -> f64 {
        let fwd = self.rotate(Point3::new(1.0, 0.0, 0.0));
        fwd.y.atan2(fwd.x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit_quaternion() {
        assert!(SE3Pose::new([1.0, 0.1, 0.0, 0.0], Point3::default()).is_err());
        assert!(SE3Pose::new([1.0, 0.0, 0.0, 0.0], Point3::default()).is_ok());
    }

    #[test]
    fn yaw_round_trip_and_inverse() {
        let p = SE3Pose::from_yaw(Point3::new(1.0, 2.0, 3.0), 0.7);
        assert!((p.yaw() - 0.7).abs() < 1e-12);
        let q = Point3::new(-4.0, 0.5, 2.0);
        let back = p.inverse().transform_point(p.transform_point(q));
        assert!(back.distance(q) < 1e-12);
        let id = p.compose(&p.inverse());
        assert!(id.translation().norm() < 1e-12);
    }

    #[test]
    fn matrix_round_trip() {
        let p = SE3Pose::from_yaw(Point3::default(), 2.5)
            .compose(&SE3Pose::from_matrix([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]], Point3::default()).unwrap());
        let q = SE3Pose::from_matrix(p.rotation_matrix(), Point3::default()).unwrap();
        let v = Point3::new(0.3, -1.0, 2.0);
        assert!(p.rotate(v).distance(q.rotate(v)) < 1e-12);
    }
}
