//! Closed-form pinhole projection onto a horizontal plane.

/// Camera looking out along its local +z axis (x right, y down).
///
/// `rotation` maps camera-frame directions into world directions, row-major.
#[derive(Debug, Clone, Copy)]
pub struct PinholeOracle {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: [[f64; 3]; 3],
    pub center: [f64; 3],
}

impl PinholeOracle {
    fn world_dir(&self, u: f64, v: f64) -> [f64; 3] {
        let c = [(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0];
        let r = &self.rotation;
        [
            r[0][0] * c[0] + r[0][1] * c[1] + r[0][2] * c[2],
            r[1][0] * c[0] + r[1][1] * c[1] + r[1][2] * c[2],
            r[2][0] * c[0] + r[2][1] * c[1] + r[2][2] * c[2],
        ]
    }

    /// World point where the ray through image coordinate `(u, v)` meets
    /// the plane `z = plane_z`, if it does so in front of the camera.
    pub fn pixel_to_plane(&self, u: f64, v: f64, plane_z: f64) -> Option<[f64; 3]> {
        let d = self.world_dir(u, v);
        if d[2].abs() < 1e-15 {
            return None;
        }
        let t = (plane_z - self.center[2]) / d[2];
        if t <= 0.0 {
            return None;
        }
        Some([self.center[0] + t * d[0], self.center[1] + t * d[1], plane_z])
    }

    /// Image coordinates of a world point, if it lies in front of the camera.
    pub fn world_to_pixel(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        let d = [p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]];
        let r = &self.rotation;
        // transpose rotation: world -> camera
        let c = [
            r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
            r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
            r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
        ];
        if c[2] <= 0.0 {
            return None;
        }
        Some([self.fx * c[0] / c[2] + self.cx, self.fy * c[1] / c[2] + self.cy])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_down_principal_ray() {
        // camera z -> world -z, camera x -> world x, camera y -> world -y
        let cam = PinholeOracle {
            fx: 100.0,
            fy: 100.0,
            cx: 50.0,
            cy: 50.0,
            rotation: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
            center: [3.0, 4.0, 2.0],
        };
        let hit = cam.pixel_to_plane(50.0, 50.0, 0.0).unwrap();
        assert_eq!(hit, [3.0, 4.0, 0.0]);
        let px = cam.world_to_pixel([4.0, 4.0, 0.0]).unwrap();
        assert!((px[0] - 100.0).abs() < 1e-12 && (px[1] - 50.0).abs() < 1e-12);
    }
}
