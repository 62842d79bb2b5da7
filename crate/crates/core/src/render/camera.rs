use crate::error::{Error, Result};
use crate::geometry::{Point3, SE3Pose};

/// Pinhole camera. Camera frame: x right, y down, z forward. Pixel (u, v)
/// integer indices have their centers at (u + 0.5, v + 0.5).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub ego_from_camera: SE3Pose,
}

impl CameraModel {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize, ego_from_camera: SE3Pose) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::InvalidGeometry(format!("focal lengths must be positive, got {fx}, {fy}")));
        }
        if !(cx >= 0.0 && cx <= width as f64 && cy >= 0.0 && cy <= height as f64) {
            return Err(Error::InvalidGeometry(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        Ok(CameraModel {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            ego_from_camera,
        })
    }

    /// Camera mounted at `mount` (ego frame), looking along ego yaw `yaw`,
    /// tilted down by `pitch` radians; principal point at the image center.
    pub fn mounted(width: usize, height: usize, focal: f64, mount: Point3, yaw: f64, pitch: f64) -> Result<Self> {
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let x = [sy, -cy, 0.0];
        let y = [-sp * cy, -sp * sy, -cp];
        let z = [cy * cp, sy * cp, -sp];
        let m = [[x[0], y[0], z[0]], [x[1], y[1], z[1]], [x[2], y[2], z[2]]];
        let pose = SE3Pose::from_matrix(m, mount)?;
        Self::new(focal, focal, 0.5 * width as f64, 0.5 * height as f64, width, height, pose)
    }

    pub fn city_from_camera(&self, ego: &SE3Pose) -> SE3Pose {
        ego.compose(&self.ego_from_camera)
    }

    pub fn camera_from_city(&self, ego: &SE3Pose) -> SE3Pose {
        self.city_from_camera(ego).inverse()
    }

    /// Continuous pixel coordinates of a camera-frame point in front of the
    /// camera.
    pub fn project(&self, p: Point3) -> Option<[f64; 2]> {
        (p.z > 0.0).then(|| [self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy])
    }

    /// Integer pixel containing continuous coordinates, if inside the image.
    pub fn pixel_of(&self, uv: [f64; 2]) -> Option<(usize, usize)> {
        let (u, v) = (uv[0].floor(), uv[1].floor());
        (u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64).then_some((u as usize, v as usize))
    }

    /// Camera-frame ray direction (z = 1) through continuous pixel coordinates.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Point3 {
        Point3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }
}
