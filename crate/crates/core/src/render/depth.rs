use crate::geometry::{Point3, SE3Pose};

use super::camera::CameraModel;
use super::raster::scan_polygon;

/// Points may sit this far behind the depth surface and still count as
/// visible.
pub const OCCLUSION_TOLERANCE: f64 = 0.5;

/// Per-pixel camera-frame depth in meters; +∞ where unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthMap {
    pub fn infinite(width: usize, height: usize) -> Self {
        Self::constant(width, height, f64::INFINITY)
    }

    pub fn constant(width: usize, height: usize, depth: f64) -> Self {
        DepthMap {
            width,
            height,
            data: vec![depth; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(c, r));
            }
        }
        DepthMap { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, d: f64) {
        self.data[row * self.width + col] = d;
    }

    pub fn finite_count(&self) -> usize {
        self.data.iter().filter(|d| d.is_finite()).count()
    }
}

/// Dense depth from sparse `(u, v, depth)` samples: linear interpolation
/// over their Delaunay triangulation, +∞ outside the convex hull.
pub fn interpolate_depth_map(points: &[[f64; 3]], camera: &CameraModel) -> DepthMap {
    let mut out = DepthMap::infinite(camera.width, camera.height);
    let pts: Vec<delaunator::Point> = points.iter().map(|p| delaunator::Point { x: p[0], y: p[1] }).collect();
    let tri = delaunator::triangulate(&pts);
    for t in tri.triangles.chunks_exact(3) {
        let [a, b, c] = [points[t[0]], points[t[1]], points[t[2]]];
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if det.abs() < 1e-12 {
            continue;
        }
        let poly = [[a[0], a[1]], [b[0], b[1]], [c[0], c[1]]];
        scan_polygon(&poly, camera.width, camera.height, |col, row| {
            let (u, v) = (col as f64 + 0.5, row as f64 + 0.5);
            let wb = ((u - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (v - a[1])) / det;
            let wc = ((b[0] - a[0]) * (v - a[1]) - (u - a[0]) * (b[1] - a[1])) / det;
            let wa = 1.0 - wb - wc;
            out.set(col, row, wa * a[2] + wb * b[2] + wc * c[2]);
        });
    }
    out
}

/// Visibility of city-frame points: inside the image, in front of the
/// camera, and no more than the tolerance behind the depth surface.
pub fn occlusion_filter(points: &[Point3], camera: &CameraModel, ego: &SE3Pose, depth: &DepthMap) -> Vec<bool> {
    let cam_from_city = camera.camera_from_city(ego);
    points
        .iter()
        .map(|p| {
            let q = cam_from_city.transform_point(*p);
            camera
                .project(q)
                .and_then(|uv| camera.pixel_of(uv))
                .is_some_and(|(c, r)| q.z <= depth.get(c, r) + OCCLUSION_TOLERANCE)
        })
        .collect()
}
